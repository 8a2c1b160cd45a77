//! Flat `key = value` configuration with command-line overrides.
//!
//! Every value remembers where it came from so that a bad value can be
//! reported as `file:line:col` or as the offending flag.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use pbh_core::quad::QuadratureConfig;
use pbh_core::solver::SolverConfig;
use pbh_core::{CouplingProfile, Model, ProfileKind};

/// Keys accepted in a config file. Anything else is rejected.
pub const KEYS: &[&str] = &[
    "dim",
    "mass",
    "u",
    "v",
    "profile",
    "beta",
    "mu",
    "mu_range",
    "eta0",
    "eta_floor",
    "eta_factor",
    "tol",
    "max_iter",
    "quad_rel_tol",
    "quad_abs_tol",
    "k_range",
    "format",
    "out",
    "n_max",
    "volume",
    "oracle_eta",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { path: PathBuf, line: usize, col: usize },
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line, col } => write!(f, "{}:{}:{}", path.display(), line, col),
            Origin::Flag(name) => write!(f, "--{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub message: String,
}

impl ConfigError {
    fn at(origin: &Origin, message: impl Into<String>) -> Self {
        Self { origin: Some(origin.clone()), message: message.into() }
    }

    /// Flags already name the key; file positions do not.
    fn keyed(origin: &Origin, key: &str, message: impl fmt::Display) -> Self {
        match origin {
            Origin::Flag(_) => Self::at(origin, message.to_string()),
            Origin::File { .. } => Self::at(origin, format!("{key}: {message}")),
        }
    }

    fn bare(message: impl Into<String>) -> Self {
        Self { origin: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Some(origin) => write!(f, "{origin}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Raw settings after merging a config file with flag overrides.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    entries: BTreeMap<String, Entry>,
}

impl Settings {
    pub fn parse_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::bare(format!("{}: cannot read config: {e}", path.display())))?;
        Self::parse_str(&text, path)
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut settings = Settings::default();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = match raw.find('#') {
                Some(hash) => &raw[..hash],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let lead = content.len() - content.trim_start().len();
            let here = |col: usize| Origin::File { path: path.to_path_buf(), line, col };
            let Some(eq) = content.find('=') else {
                return Err(ConfigError::at(&here(lead + 1), "expected `key = value`"));
            };
            let key = content[..eq].trim();
            if key.is_empty() {
                return Err(ConfigError::at(&here(lead + 1), "missing key before `=`"));
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::at(&here(lead + 1), format!("unknown key `{key}`")));
            }
            let rest = &content[eq + 1..];
            let value = rest.trim();
            let value_col = eq + 2 + (rest.len() - rest.trim_start().len());
            if value.is_empty() {
                return Err(ConfigError::at(&here(value_col), format!("{key}: missing value")));
            }
            if let Some(previous) = settings.entries.get(key) {
                return Err(ConfigError::at(
                    &here(lead + 1),
                    format!("{key}: duplicate key, first set at {}", previous.origin),
                ));
            }
            settings.entries.insert(key.to_string(), Entry { value: value.to_string(), origin: here(value_col) });
        }
        Ok(settings)
    }

    /// Flag values replace file values. `flag` is the flag name without dashes.
    pub fn set_flag(&mut self, key: &str, flag: &str, value: &str) {
        debug_assert!(KEYS.contains(&key));
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), origin: Origin::Flag(flag.to_string()) });
    }

    /// When one of two exclusive keys came from a flag, drop the other if it
    /// only came from the file.
    pub fn prefer_flag(&mut self, a: &str, b: &str) {
        let from_flag = |s: &Self, k: &str| matches!(s.origin(k), Some(Origin::Flag(_)));
        if from_flag(self, a) && !from_flag(self, b) {
            self.entries.remove(b);
        } else if from_flag(self, b) && !from_flag(self, a) {
            self.entries.remove(a);
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn entry(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn origin(&self, key: &str) -> Option<&Origin> {
        self.entries.get(key).map(|e| &e.origin)
    }

    fn fail(&self, key: &str, message: impl fmt::Display) -> ConfigError {
        match self.origin(key) {
            Some(origin) => ConfigError::keyed(origin, key, message),
            None => ConfigError::bare(format!("{key}: {message}")),
        }
    }

    fn get<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        match self.entry(key) {
            Some(entry) => parse(&entry.value).map_err(|m| ConfigError::keyed(&entry.origin, key, m)),
            None => Ok(default),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.get(key, default, parse_f64)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.get(key, default, |s| {
            let x = parse_f64(s)?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err(format!("must be positive, got {x}"))
            }
        })
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.get(key, default, |s| {
            let n: usize = s.trim().parse().map_err(|_| format!("expected a positive integer, got `{s}`"))?;
            if n == 0 {
                Err("must be positive".into())
            } else {
                Ok(n)
            }
        })
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("expected a number, got `{}`", s.trim()))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got `{}`", s.trim()))
    }
}

/// `a:b:n` with `n` points including both ends; `n = 1` gives `[a]`.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected `start:stop:count`, got `{s}`"));
    };
    let a = parse_f64(a)?;
    let b = parse_f64(b)?;
    let n: usize = n.trim().parse().map_err(|_| format!("count must be a positive integer, got `{}`", n.trim()))?;
    match n {
        0 => Err("count must be positive".into()),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_f64).collect()
}

/// `gaussian:a`, `power:c:p` or `delta`.
pub fn parse_profile(s: &str) -> Result<ProfileKind, String> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    match parts.as_slice() {
        ["gaussian", a] => Ok(ProfileKind::Gaussian { a: parse_f64(a)? }),
        ["power", c, p] => Ok(ProfileKind::Power { c: parse_f64(c)?, p: parse_f64(p)? }),
        ["delta"] => Ok(ProfileKind::DeltaZero),
        _ => Err(format!("expected gaussian:a, power:c:p or delta, got `{}`", s.trim())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s.trim() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(format!("expected csv or json, got `{other}`")),
    }
}

/// Model defaults differ between the physics commands and the oracle.
#[derive(Debug, Clone, Copy)]
pub struct ModelDefaults {
    pub dim: usize,
    pub mass: f64,
    pub u: f64,
    pub v: f64,
    pub profile: ProfileKind,
}

impl ModelDefaults {
    pub const PHYSICS: Self = Self { dim: 3, mass: 0.5, u: 0.0, v: 1.0, profile: ProfileKind::Gaussian { a: 0.5 } };
    pub const ORACLE: Self = Self { dim: 1, mass: 0.5, u: 0.5, v: 1.0, profile: ProfileKind::Gaussian { a: 1.0 } };
}

/// Fully validated settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub betas: Vec<f64>,
    pub mus: Vec<f64>,
    pub solver: SolverConfig,
    pub k_grid: Vec<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub n_max: Option<u32>,
    pub volume: Option<f64>,
    pub oracle_eta: Option<f64>,
}

impl RunConfig {
    pub fn from_settings(s: &Settings, defaults: ModelDefaults, default_mu: f64) -> Result<Self, ConfigError> {
        let dim = s.count("dim", defaults.dim)?;
        let mass = s.f64("mass", defaults.mass)?;
        let u = s.f64("u", defaults.u)?;
        let v = s.f64("v", defaults.v)?;
        let kind = s.get("profile", defaults.profile, parse_profile)?;
        let profile = CouplingProfile::with_default_decay(kind, dim).map_err(|e| s.fail("profile", e))?;
        let model = Model::new(dim, mass, u, v, profile).map_err(|e| {
            let key = ["v", "u", "mass", "dim"].into_iter().find(|k| s.contains(k)).unwrap_or("v");
            s.fail(key, e)
        })?;

        let betas = s.get("beta", vec![1.0], parse_list)?;
        if let Some(bad) = betas.iter().find(|b| !(**b > 0.0)) {
            return Err(s.fail("beta", format!("requires beta > 0, got {bad}")));
        }
        if s.contains("mu") && s.contains("mu_range") {
            return Err(s.fail("mu_range", "conflicts with `mu`; give one of them"));
        }
        let mus = if s.contains("mu_range") {
            s.get("mu_range", Vec::new(), parse_range)?
        } else {
            vec![s.f64("mu", default_mu)?]
        };

        let base = SolverConfig::default();
        let quad = QuadratureConfig {
            rel_tol: s.positive("quad_rel_tol", base.quad.rel_tol)?,
            abs_tol: s.positive("quad_abs_tol", base.quad.abs_tol)?,
            ..base.quad
        };
        let solver = SolverConfig {
            quad,
            tol: s.positive("tol", base.tol)?,
            max_iter: s.count("max_iter", base.max_iter)?,
            eta0: s.positive("eta0", base.eta0)?,
            eta_floor: s.positive("eta_floor", base.eta_floor)?,
            eta_factor: s.positive("eta_factor", base.eta_factor)?,
            ..base
        };
        if let Err(e) = solver.validate() {
            let key = ["eta_factor", "eta0", "eta_floor", "quad_rel_tol", "quad_abs_tol", "tol"]
                .into_iter()
                .find(|k| s.contains(k))
                .unwrap_or("tol");
            return Err(s.fail(key, e));
        }

        let k_grid = s.get("k_range", parse_range("0:5:51").expect("default range"), parse_range)?;
        if let Some(bad) = k_grid.iter().find(|k| **k < 0.0) {
            return Err(s.fail("k_range", format!("|k| must be nonnegative, got {bad}")));
        }
        let format = match s.entry("format") {
            Some(_) => Some(s.get("format", Format::Csv, parse_format)?),
            None => None,
        };
        let out = s.entry("out").map(|e| PathBuf::from(&e.value));
        let n_max = match s.entry("n_max") {
            Some(_) => Some(s.count("n_max", 1)? as u32),
            None => None,
        };
        let volume = match s.entry("volume") {
            Some(_) => Some(s.positive("volume", 1.0)?),
            None => None,
        };
        let oracle_eta = match s.entry("oracle_eta") {
            Some(_) => Some(s.get("oracle_eta", 0.0, |x| {
                let x = parse_f64(x)?;
                if x >= 0.0 {
                    Ok(x)
                } else {
                    Err(format!("must be nonnegative, got {x}"))
                }
            })?),
            None => None,
        };

        Ok(Self { model, betas, mus, solver, k_grid, format, out, n_max, volume, oracle_eta })
    }

    /// Grid points with β outer and μ inner.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.betas.iter().flat_map(|&b| self.mus.iter().map(move |&m| (b, m))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Settings, ConfigError> {
        Settings::parse_str(text, Path::new("run.ini"))
    }

    #[test]
    fn unknown_key_reports_position() {
        let err = parse("u = 0.1\n  bogus = 3\n").unwrap_err();
        assert_eq!(err.to_string(), "run.ini:2:3: unknown key `bogus`");
    }

    #[test]
    fn bad_value_points_at_value() {
        let s = parse("# comment\nbeta = 1, x\n").unwrap();
        let err = RunConfig::from_settings(&s, ModelDefaults::PHYSICS, 0.0).unwrap_err();
        assert_eq!(err.to_string(), "run.ini:2:8: beta: expected a number, got `x`");
    }

    #[test]
    fn flags_override_file() {
        let mut s = parse("u = 0.1   # trailing\nmu = -0.3\n").unwrap();
        s.set_flag("u", "u", "0.2");
        let cfg = RunConfig::from_settings(&s, ModelDefaults::PHYSICS, 0.0).unwrap();
        assert_eq!(cfg.model.u(), 0.2);
        assert_eq!(cfg.mus, vec![-0.3]);
    }

    #[test]
    fn model_invariant_is_located() {
        let s = parse("u = 1.0\nv = 0.5\n").unwrap();
        let err = RunConfig::from_settings(&s, ModelDefaults::PHYSICS, 0.0).unwrap_err();
        assert!(err.to_string().starts_with("run.ini:2:5: v: "));
        assert!(err.to_string().contains("requires v − u > 0"));
    }

    #[test]
    fn duplicates_and_sections_rejected() {
        assert!(parse("u = 1\nu = 2\n").is_err());
        assert!(parse("[model]\n").is_err());
        assert!(parse("u =\n").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("2:9:1").unwrap(), vec![2.0]);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert_eq!(parse_profile("power:1:5").unwrap(), ProfileKind::Power { c: 1.0, p: 5.0 });
        assert!(parse_profile("lorentz:1").is_err());
    }
}
