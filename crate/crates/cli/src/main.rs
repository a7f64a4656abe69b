//! `qexpfam`: boundary sweeps, entropy distances and reports for exponential
//! families of quantum states.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FamilySpec, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] qexpfam::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0} finding(s) violate their contract")]
    Contract(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Numerical(_) => 3,
            Self::Contract(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "qexpfam", version, about = "Entropy distance from exponential families of quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean value set boundaries with face classification, one per cone angle.
    Sweep(Common),
    /// Entropy distance of a state from the family.
    Distance(Common),
    /// Numerical witnesses: staffelberg, swallow, closures or maximizer.
    Report {
        which: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated cone angles, e.g. `0,pi/12,pi/6`.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// staffelberg | swallow | abelian | cone:<phi>
    #[arg(long)]
    family: Option<String>,
    /// rho:<alpha> | apex | c | tracial | tau:<lambda> | member:<x>,<y> | diag:<...> | matrix:<...>
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print only key=value result lines.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(phi) = &self.phi {
            cfg.phi = config::parse_list(phi)?;
        }
        if let Some(f) = &self.family {
            let spec = FamilySpec::parse_name(f)?;
            if matches!(spec, FamilySpec::Custom { .. }) {
                return Err(CliError::Config("custom families are given in a config file".into()));
            }
            if cfg.blocks.is_some() && cfg.blocks != spec.default_blocks() {
                cfg.blocks = None;
            }
            cfg.family = Some(spec);
        }
        if let Some(dir) = &self.out {
            cfg.out_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep(c) => commands::sweep(&c.resolve()?, c.quiet),
        Command::Distance(c) => commands::distance(&c.resolve()?, c.state.as_deref(), c.quiet),
        Command::Report { which, common } => commands::report(&common.resolve()?, which.as_deref(), common.quiet),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qexpfam: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
