//! Run configuration: a sectioned `key = value` text format, family and
//! state specifications.
//!
//! ```text
//! [algebra]
//! blocks = 2, 1
//!
//! [family]
//! name = custom
//! offset = 0,0; 0,0; 0,0; 0,0 | 1,0
//! generator = 0,0; 1,0; 1,0; 0,0 | 0,0
//!
//! [solver]
//! tol = 1e-10
//! param_cap = 80
//! max_iter = 500
//!
//! [sweep]
//! n_angles = 720
//! phi = 0, pi/12, pi/6
//!
//! [output]
//! dir = out
//! seed = 0
//! ```
//!
//! Matrices are written block by block, separated by `|`; inside a block the
//! entries are row-major `re,im` pairs separated by `;`.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex;
use qexpfam::expfam::{ExponentialFamily, SolverOptions};
use qexpfam::{cone, closures, Algebra, HermitianElement, State};

use crate::CliError;

type Blocks = Vec<Vec<Complex<f64>>>;

/// A family selected by name or given by its generators.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Staffelberg,
    Swallow,
    Cone(f64),
    Abelian,
    Custom { offset: Option<Blocks>, generators: Vec<Blocks> },
}

impl FamilySpec {
    /// Parses a family name; `custom` starts with no generators.
    pub fn parse_name(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        Ok(match s {
            "staffelberg" => Self::Staffelberg,
            "swallow" => Self::Swallow,
            "abelian" => Self::Abelian,
            "custom" => Self::Custom {
                offset: None,
                generators: Vec::new(),
            },
            _ => match s.strip_prefix("cone:") {
                Some(phi) => Self::Cone(parse_number(phi)?),
                None => return Err(CliError::Config(format!("unknown family '{s}'"))),
            },
        })
    }

    pub fn name(&self) -> String {
        match self {
            Self::Staffelberg => "staffelberg".into(),
            Self::Swallow => "swallow".into(),
            Self::Cone(phi) => format!("cone:{phi:?}"),
            Self::Abelian => "abelian".into(),
            Self::Custom { .. } => "custom".into(),
        }
    }

    /// Block dimensions of the algebra the family lives on.
    pub fn default_blocks(&self) -> Option<Vec<usize>> {
        match self {
            Self::Staffelberg | Self::Swallow | Self::Cone(_) => Some(vec![2, 1]),
            Self::Abelian => Some(vec![1; 4]),
            Self::Custom { .. } => None,
        }
    }

    pub fn build(&self, blocks: &[usize]) -> Result<ExponentialFamily, CliError> {
        let fam = match self {
            Self::Staffelberg => cone::staffelberg_family(),
            Self::Swallow => cone::swallow_family(),
            Self::Cone(phi) => cone::cone_family(*phi).map_err(|e| CliError::Config(e.to_string()))?,
            Self::Abelian => closures::abelian_example(),
            Self::Custom { offset, generators } => {
                let alg = Algebra::new(blocks.to_vec()).map_err(|e| CliError::Config(e.to_string()))?;
                let element = |b: &Blocks| {
                    HermitianElement::from_block_entries(&alg, b.clone())
                        .map_err(|e| CliError::Config(format!("custom matrix: {e}")))
                };
                let offset = match offset {
                    Some(b) => element(b)?,
                    None => HermitianElement::zero(&alg),
                };
                let mut gens = Vec::with_capacity(generators.len());
                for g in generators {
                    let g = element(g)?.traceless_part();
                    if g.norm() <= 1e-12 {
                        return Err(CliError::Config("custom generator is a multiple of the identity".into()));
                    }
                    gens.push(g);
                }
                ExponentialFamily::new(offset, &gens).map_err(|e| CliError::Config(format!("custom family: {e}")))?
            }
        };
        if fam.algebra().block_dims() != blocks {
            return Err(CliError::Config(format!(
                "family {} lives on blocks {:?}, config has {:?}",
                self.name(),
                fam.algebra().block_dims(),
                blocks
            )));
        }
        Ok(fam)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Block dimensions; `None` takes them from the family.
    pub blocks: Option<Vec<usize>>,
    pub family: Option<FamilySpec>,
    pub solver: SolverOptions,
    pub n_angles: usize,
    /// Cone angles for `sweep`; empty means "not given".
    pub phi: Vec<f64>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            blocks: None,
            family: None,
            solver: SolverOptions::default(),
            n_angles: qexpfam::boundary::DEFAULT_ANGLES,
            phi: Vec::new(),
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut custom_offset = None;
        let mut custom_gens = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| CliError::Config(format!("line {}: {msg}", lineno + 1));
            if let Some(name) = line.strip_prefix('[') {
                section = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("bad section header '{line}'")))?
                    .trim()
                    .to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let wrap = |e: CliError| err(e.to_string());
            match (section.as_str(), key) {
                ("algebra", "blocks") => {
                    let dims = value
                        .split(',')
                        .map(|d| d.trim().parse::<usize>().map_err(|e| err(format!("block dimension '{d}': {e}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    cfg.blocks = Some(dims);
                }
                ("family", "name") => cfg.family = Some(FamilySpec::parse_name(value).map_err(wrap)?),
                ("family", "offset") => custom_offset = Some(parse_blocks(value).map_err(wrap)?),
                ("family", "generator") => custom_gens.push(parse_blocks(value).map_err(wrap)?),
                ("solver", "tol") => cfg.solver.tol = parse_number(value).map_err(wrap)?,
                ("solver", "param_cap") => cfg.solver.param_cap = parse_number(value).map_err(wrap)?,
                ("solver", "max_iter") => cfg.solver.max_iter = parse_int(value).map_err(wrap)?,
                ("sweep", "n_angles") => cfg.n_angles = parse_int(value).map_err(wrap)?,
                ("sweep", "phi") => cfg.phi = parse_list(value).map_err(wrap)?,
                ("output", "dir") => cfg.out_dir = PathBuf::from(value),
                ("output", "seed") => cfg.seed = parse_int(value).map_err(wrap)? as u64,
                _ => return Err(err(format!("unknown key '{key}' in section [{section}]"))),
            }
        }
        match &mut cfg.family {
            Some(FamilySpec::Custom { offset, generators }) => {
                *offset = custom_offset;
                *generators = custom_gens;
                if generators.is_empty() {
                    return Err(CliError::Config("custom family needs at least one generator".into()));
                }
                if cfg.blocks.is_none() {
                    return Err(CliError::Config("custom family needs [algebra] blocks".into()));
                }
            }
            _ if custom_offset.is_some() || !custom_gens.is_empty() => {
                return Err(CliError::Config("offset/generator lines require name = custom".into()));
            }
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(CliError::Config(format!("solver tol must be positive, got {}", s.tol)));
        }
        if !(s.param_cap > 0.0 && s.param_cap.is_finite()) {
            return Err(CliError::Config(format!("param_cap must be positive, got {}", s.param_cap)));
        }
        if s.max_iter == 0 {
            return Err(CliError::Config("max_iter must be positive".into()));
        }
        if let Some(b) = &self.blocks {
            if b.is_empty() || b.contains(&0) {
                return Err(CliError::Config(format!("invalid block dimensions {b:?}")));
            }
        }
        Ok(())
    }

    /// Canonical text form; `parse(emit(c)) == c`.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        if let Some(b) = &self.blocks {
            let dims: Vec<String> = b.iter().map(usize::to_string).collect();
            s.push_str(&format!("[algebra]\nblocks = {}\n\n", dims.join(", ")));
        }
        if let Some(f) = &self.family {
            s.push_str(&format!("[family]\nname = {}\n", f.name()));
            if let FamilySpec::Custom { offset, generators } = f {
                if let Some(o) = offset {
                    s.push_str(&format!("offset = {}\n", emit_blocks(o)));
                }
                for g in generators {
                    s.push_str(&format!("generator = {}\n", emit_blocks(g)));
                }
            }
            s.push('\n');
        }
        s.push_str(&format!(
            "[solver]\ntol = {:?}\nparam_cap = {:?}\nmax_iter = {}\n\n",
            self.solver.tol, self.solver.param_cap, self.solver.max_iter
        ));
        s.push_str(&format!("[sweep]\nn_angles = {}\n", self.n_angles));
        if !self.phi.is_empty() {
            let phi: Vec<String> = self.phi.iter().map(|x| format!("{x:?}")).collect();
            s.push_str(&format!("phi = {}\n", phi.join(", ")));
        }
        s.push_str(&format!("\n[output]\ndir = {}\nseed = {}\n", self.out_dir.display(), self.seed));
        s
    }

    /// Algebra blocks, from the config or the family.
    pub fn resolved_blocks(&self) -> Result<Vec<usize>, CliError> {
        match (&self.blocks, self.family.as_ref().and_then(FamilySpec::default_blocks)) {
            (Some(b), _) => Ok(b.clone()),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(CliError::Config("no algebra blocks given".into())),
        }
    }

    pub fn build_family(&self) -> Result<ExponentialFamily, CliError> {
        let f = self
            .family
            .as_ref()
            .ok_or_else(|| CliError::Config("no family given (use --family or [family] name)".into()))?;
        f.build(&self.resolved_blocks()?)
    }
}

fn parse_int(s: &str) -> Result<usize, CliError> {
    s.trim()
        .parse::<usize>()
        .map_err(|e| CliError::Config(format!("integer '{s}': {e}")))
}

/// A real number, `pi`, or a product/quotient of those with an optional sign,
/// e.g. `-3*pi/12`.
pub fn parse_number(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("bad number '{s}'"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let factor = |f: &str| -> Result<f64, CliError> {
        let f = f.trim();
        if f == "pi" {
            Ok(PI)
        } else {
            f.parse::<f64>().map_err(|_| bad())
        }
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut start = 0;
    for (i, ch) in body.char_indices().chain([(body.len(), '*')]) {
        if ch == '*' || ch == '/' {
            let x = factor(&body[start..i])?;
            value = if op == '*' { value * x } else { value / x };
            op = ch;
            start = i + 1;
        }
    }
    Ok(sign * value)
}

/// Comma-separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_number).collect()
}

/// `re,im; re,im | re,im` into row-major entries per block.
pub fn parse_blocks(s: &str) -> Result<Blocks, CliError> {
    s.split('|')
        .map(|block| {
            block
                .split(';')
                .map(|pair| {
                    let (re, im) = match pair.split_once(',') {
                        Some((re, im)) => (parse_number(re)?, parse_number(im)?),
                        None => (parse_number(pair)?, 0.0),
                    };
                    Ok(Complex::new(re, im))
                })
                .collect()
        })
        .collect()
}

fn emit_blocks(b: &Blocks) -> String {
    let blocks: Vec<String> = b
        .iter()
        .map(|block| {
            let e: Vec<String> = block.iter().map(|z| format!("{:?},{:?}", z.re, z.im)).collect();
            e.join("; ")
        })
        .collect();
    blocks.join(" | ")
}

/// Parses a state specification against the family's algebra:
/// `rho:<alpha>`, `apex`, `c`, `tracial`, `tau:<lambda>`, `member:<x>,<y>,...`,
/// `diag:<d1>,<d2>,...` or `matrix:<blocks>`.
pub fn parse_state(spec: &str, family: &ExponentialFamily) -> Result<State, CliError> {
    let alg = family.algebra();
    let cone_only = |name: &str| {
        if alg.block_dims() == [2, 1] {
            Ok(())
        } else {
            Err(CliError::Config(format!("state '{name}' needs the algebra Mat(2) ⊕ C")))
        }
    };
    let core = |e: qexpfam::Error| CliError::Config(format!("state '{spec}': {e}"));
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match head.trim() {
        "rho" => {
            cone_only("rho")?;
            Ok(cone::base_circle_state(parse_number(arg)?))
        }
        "apex" => {
            cone_only("apex")?;
            Ok(cone::apex())
        }
        "c" => {
            cone_only("c")?;
            Ok(cone::staffelberg_c())
        }
        "tau" => {
            cone_only("tau")?;
            cone::staffelberg_tau(parse_number(arg)?).map_err(core)
        }
        "tracial" => Ok(State::tracial(alg)),
        "member" => {
            let c = parse_list(arg)?;
            if c.len() != family.dim() {
                return Err(CliError::Config(format!(
                    "member needs {} coordinates, got {}",
                    family.dim(),
                    c.len()
                )));
            }
            Ok(family.state_at(&c))
        }
        "diag" => {
            let d = parse_list(arg)?;
            let e = HermitianElement::from_real_diagonal(alg, &d).map_err(core)?;
            State::from_positive(&e).map_err(core)
        }
        "matrix" => {
            let e = HermitianElement::from_block_entries(alg, parse_blocks(arg)?).map_err(core)?;
            State::new(e).map_err(core)
        }
        other => Err(CliError::Config(format!("unknown state spec '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert!((parse_number("pi/12").unwrap() - PI / 12.0).abs() < 1e-15);
        assert!((parse_number("-3*pi/12").unwrap() + PI / 4.0).abs() < 1e-15);
        assert!(parse_number("pie").is_err());
        assert!(parse_number("").is_err());
    }

    #[test]
    fn named_config_round_trip() {
        let text = "[family]\nname = cone:pi/6\n[sweep]\nn_angles = 360\nphi = 0, pi/12\n[output]\nseed = 7\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.family, Some(FamilySpec::Cone(PI / 6.0)));
        assert_eq!(cfg.seed, 7);
        let again = RunConfig::parse(&cfg.emit()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.emit(), cfg.emit());
    }

    #[test]
    fn custom_family_round_trip_and_build() {
        let text = "[algebra]\nblocks = 1,1,1\n[family]\nname = custom\ngenerator = 1 | -1 | 0\ngenerator = 0.1,0 | 0 | 0.3\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(RunConfig::parse(&cfg.emit()).unwrap(), cfg);
        let fam = cfg.build_family().unwrap();
        assert_eq!(fam.dim(), 2);
        for v in fam.basis() {
            assert!(v.trace().abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_custom_input() {
        let non_hermitian = "[algebra]\nblocks = 2\n[family]\nname = custom\ngenerator = 0,0; 1,0; 0,0; 0,0\n";
        assert!(RunConfig::parse(non_hermitian).unwrap().build_family().is_err());
        let identity = "[algebra]\nblocks = 1,1\n[family]\nname = custom\ngenerator = 1 | 1\n";
        assert!(RunConfig::parse(identity).unwrap().build_family().is_err());
        assert!(RunConfig::parse("[family]\nname = moon\n").is_err());
        assert!(RunConfig::parse("[solver]\ntol = -1\n").is_err());
        assert!(RunConfig::parse("[solver]\nwhat = 1\n").is_err());
        assert!(RunConfig::parse("[family]\ngenerator = 1 | -1\n").is_err());
    }

    #[test]
    fn state_specs() {
        let fam = cone::staffelberg_family();
        assert_eq!(parse_state("c", &fam).unwrap().distance(&cone::staffelberg_c()), 0.0);
        assert_eq!(parse_state("rho:0", &fam).unwrap().distance(&cone::base_circle_state(0.0)), 0.0);
        let m = parse_state("member:0.1,0.2", &fam).unwrap();
        assert_eq!(m.distance(&fam.state_at(&[0.1, 0.2])), 0.0);
        let d = parse_state("diag:1,1,2", &fam).unwrap();
        assert!((d.element().trace() - 1.0).abs() < 1e-15);
        assert!(parse_state("member:1", &fam).is_err());
        assert!(parse_state("tau:3", &fam).is_err());
        let ab = closures::abelian_example();
        assert!(parse_state("apex", &ab).is_err());
    }
}
