//! Atomic file output and stdout reporting.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

pub struct Output {
    dir: PathBuf,
    quiet: bool,
}

impl Output {
    pub fn new(dir: &Path, quiet: bool) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            quiet,
        })
    }

    /// Writes `name` inside the output directory through a temporary file
    /// in the same directory, renamed into place once complete.
    pub fn write<F>(&self, name: &str, fill: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut NamedTempFile) -> qexpfam::Result<()>,
    {
        let path = self.dir.join(name);
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(io)?;
        fill(&mut tmp)?;
        tmp.flush().map_err(io)?;
        tmp.persist(&path).map_err(|e| io(e.error))?;
        self.note(&format!("wrote {}", path.display()));
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        self.write(name, |f| {
            f.write_all(text.as_bytes())
                .map_err(|e| qexpfam::Error::Serialize(e.to_string()))
        })
    }

    /// Machine-readable result line, printed even with `--quiet`.
    pub fn emit(&self, line: &str) {
        println!("{line}");
    }

    /// Human-oriented line, suppressed by `--quiet`.
    pub fn note(&self, line: &str) {
        if !self.quiet {
            println!("# {line}");
        }
    }
}
