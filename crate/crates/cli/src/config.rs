//! Flat `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use spm_core::problem::{steps_for, Strategy};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Benchmark1d,
    VugStatic,
    AllenCahn6d,
    AllenCahnNonlocal6d,
    Hjb7d,
    NonlocalLinearHd,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Benchmark1d,
        Experiment::VugStatic,
        Experiment::AllenCahn6d,
        Experiment::AllenCahnNonlocal6d,
        Experiment::Hjb7d,
        Experiment::NonlocalLinearHd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Benchmark1d => "benchmark_1d",
            Experiment::VugStatic => "vug_static",
            Experiment::AllenCahn6d => "allen_cahn_6d",
            Experiment::AllenCahnNonlocal6d => "allen_cahn_nonlocal_6d",
            Experiment::Hjb7d => "hjb_7d",
            Experiment::NonlocalLinearHd => "nonlocal_linear_hd",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Experiment::Benchmark1d => "1-D u_t = u_x + u_xx + u - u^3 against a spectral splitting reference",
            Experiment::VugStatic => "sparse reconstruction of a signed beta-product mixture on [0,1]^d",
            Experiment::AllenCahn6d => "6-D Allen-Cahn with a forced closed-form solution",
            Experiment::AllenCahnNonlocal6d => "6-D Allen-Cahn with the fractional Laplacian",
            Experiment::Hjb7d => "7-D HJB (|grad u|^2 nonlinearity) with a forced closed-form solution",
            Experiment::NonlocalLinearHd => "high-dimensional linear nonlocal Fokker-Planck, particle by particle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: expected {expected}, got `{value}`")]
    Type { key: String, expected: &'static str, value: String },
    #[error("key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("cannot read {path}: {reason}")]
    Read { path: PathBuf, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub h: f64,
    pub tau: f64,
    pub t_final: f64,
    pub seed: u64,
    pub workers: usize,
    pub strategy: Strategy,
    pub dim: usize,
    pub c: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub b: f64,
    pub x0: f64,
    pub output_dir: PathBuf,
}

pub const KEYS: [&str; 15] = [
    "experiment", "N", "h", "tau", "T", "seed", "workers", "strategy", "d", "c", "alpha", "epsilon", "b", "x0",
    "output_dir",
];

impl RunConfig {
    /// Defaults of an experiment; N stays 0 until set.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = RunConfig {
            experiment,
            n: 0,
            h: 0.1,
            tau: 0.1,
            t_final: 1.0,
            seed: 1,
            workers: 1,
            strategy: Strategy::B,
            dim: 1,
            c: 0.0,
            alpha: 1.5,
            epsilon: 0.005,
            b: 0.0,
            x0: 0.0,
            output_dir: PathBuf::from("spm-output"),
        };
        match experiment {
            Experiment::Benchmark1d => RunConfig {
                h: 0.01,
                tau: 0.01,
                strategy: Strategy::A,
                c: 1.0,
                b: 1.0,
                ..base
            },
            Experiment::VugStatic => RunConfig { dim: 4, h: 0.0625, ..base },
            Experiment::AllenCahn6d => RunConfig {
                dim: 6,
                c: 1.0,
                h: 0.4,
                t_final: 2.0,
                ..base
            },
            Experiment::Hjb7d => RunConfig {
                dim: 7,
                c: 0.5,
                h: 0.4,
                t_final: 2.0,
                ..base
            },
            Experiment::AllenCahnNonlocal6d => RunConfig {
                dim: 6,
                h: 0.1,
                tau: 0.01,
                t_final: 2.0,
                ..base
            },
            Experiment::NonlocalLinearHd => RunConfig {
                dim: 1000,
                c: 0.2,
                b: 1.0,
                h: 0.25,
                t_final: 4.0,
                ..base
            },
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. Later `overrides`
    /// (already split into key and value) replace file entries.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if pairs.iter().any(|(p, _)| *p == k) {
                return Err(ConfigError::Duplicate(k));
            }
            pairs.push((k, v));
        }
        for (k, v) in overrides {
            match pairs.iter_mut().find(|(p, _)| p == k) {
                Some(slot) => slot.1 = v.clone(),
                None => pairs.push((k.clone(), v.clone())),
            }
        }
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

        let exp_text = get("experiment").ok_or(ConfigError::Missing("experiment"))?;
        let experiment = Experiment::parse(exp_text).ok_or_else(|| ConfigError::Type {
            key: "experiment".into(),
            expected: "one of benchmark_1d, vug_static, allen_cahn_6d, allen_cahn_nonlocal_6d, hjb_7d, nonlocal_linear_hd",
            value: exp_text.into(),
        })?;
        let mut cfg = RunConfig::defaults(experiment);
        cfg.n = parse_count(get("N").ok_or(ConfigError::Missing("N"))?, "N")?;

        for (k, v) in &pairs {
            let v = v.as_str();
            match k.as_str() {
                "experiment" | "N" => {}
                "h" => cfg.h = parse_real(v, "h")?,
                "tau" => cfg.tau = parse_real(v, "tau")?,
                "T" => cfg.t_final = parse_real(v, "T")?,
                "seed" => {
                    cfg.seed = v.parse().map_err(|_| type_err("seed", "a non-negative integer", v))?;
                }
                "workers" => cfg.workers = parse_count(v, "workers")?,
                "strategy" => {
                    cfg.strategy = match v {
                        "A" | "a" => Strategy::A,
                        "B" | "b" => Strategy::B,
                        _ => return Err(type_err("strategy", "A or B", v)),
                    }
                }
                "d" => cfg.dim = parse_count(v, "d")?,
                "c" => cfg.c = parse_real(v, "c")?,
                "alpha" => cfg.alpha = parse_real(v, "alpha")?,
                "epsilon" => cfg.epsilon = parse_real(v, "epsilon")?,
                "b" => cfg.b = parse_real(v, "b")?,
                "x0" => cfg.x0 = parse_real(v, "x0")?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                _ => unreachable!("keys were checked above"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &'static str, reason: String| Err(ConfigError::Invalid { key, reason });
        if self.n == 0 {
            return invalid("N", "must be at least 1".into());
        }
        if self.workers == 0 {
            return invalid("workers", "must be at least 1".into());
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return invalid("h", format!("must be positive, got {}", self.h));
        }
        if self.experiment != Experiment::VugStatic {
            if !(self.tau > 0.0 && self.tau.is_finite()) {
                return invalid("tau", format!("must be positive, got {}", self.tau));
            }
            if let Err(e) = steps_for(self.t_final, self.tau) {
                return invalid("T", e.to_string());
            }
        }
        if self.c < 0.0 || !self.c.is_finite() {
            return invalid("c", format!("must be non-negative, got {}", self.c));
        }
        match self.experiment {
            Experiment::Benchmark1d if self.dim != 1 => return invalid("d", "benchmark_1d is one-dimensional".into()),
            Experiment::Benchmark1d if self.b != 1.0 => return invalid("b", "the benchmark equation fixes b = 1".into()),
            Experiment::Benchmark1d if self.c != 1.0 => return invalid("c", "the benchmark equation fixes c = 1".into()),
            Experiment::Hjb7d if self.strategy == Strategy::A => {
                return invalid(
                    "strategy",
                    "hjb_7d needs strategy B: |grad u|^2 does not vanish with u, so the weight multiplier is undefined".into(),
                )
            }
            Experiment::AllenCahn6d if self.strategy == Strategy::A => {
                return invalid("strategy", "allen_cahn_6d is driven by a forcing term and needs strategy B".into())
            }
            Experiment::AllenCahn6d | Experiment::Hjb7d | Experiment::AllenCahnNonlocal6d if self.dim < 2 => {
                return invalid("d", "the projection studies need d >= 2".into())
            }
            Experiment::VugStatic if self.dim > spm_core::grid::MAX_GRID_DIM => {
                return invalid("d", format!("at most {} dimensions", spm_core::grid::MAX_GRID_DIM))
            }
            Experiment::VugStatic if ((1.0 / self.h) - (1.0 / self.h).round()).abs() > 1e-9 => {
                return invalid("h", "must divide the unit interval".into())
            }
            _ => {}
        }
        if matches!(self.experiment, Experiment::AllenCahn6d | Experiment::Hjb7d | Experiment::AllenCahnNonlocal6d)
            && self.dim > spm_core::grid::MAX_GRID_DIM
        {
            return invalid("d", format!("at most {} dimensions", spm_core::grid::MAX_GRID_DIM));
        }
        if matches!(self.experiment, Experiment::AllenCahnNonlocal6d | Experiment::NonlocalLinearHd) {
            if !(self.alpha > 0.0 && self.alpha < 2.0) {
                return invalid("alpha", format!("must lie in (0, 2), got {}", self.alpha));
            }
            if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
                return invalid("epsilon", format!("must be positive, got {}", self.epsilon));
            }
        }
        Ok(())
    }

    /// Canonical `key = value` text with every key, in a fixed order.
    pub fn canonical(&self) -> String {
        use spm_core::fmt::fmt_f64;
        let strategy = match self.strategy {
            Strategy::A => "A",
            Strategy::B => "B",
        };
        [
            format!("experiment = {}", self.experiment),
            format!("N = {}", self.n),
            format!("h = {}", fmt_f64(self.h)),
            format!("tau = {}", fmt_f64(self.tau)),
            format!("T = {}", fmt_f64(self.t_final)),
            format!("seed = {}", self.seed),
            format!("workers = {}", self.workers),
            format!("strategy = {strategy}"),
            format!("d = {}", self.dim),
            format!("c = {}", fmt_f64(self.c)),
            format!("alpha = {}", fmt_f64(self.alpha)),
            format!("epsilon = {}", fmt_f64(self.epsilon)),
            format!("b = {}", fmt_f64(self.b)),
            format!("x0 = {}", fmt_f64(self.x0)),
            format!("output_dir = {}", self.output_dir.display()),
        ]
        .join("\n")
            + "\n"
    }
}

fn type_err(key: &str, expected: &'static str, value: &str) -> ConfigError {
    ConfigError::Type {
        key: key.into(),
        expected,
        value: value.into(),
    }
}

fn parse_real(v: &str, key: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>().map_err(|_| type_err(key, "a real number", v))
}

/// Accepts plain integers and exact scientific forms such as `1e6` or `1.6e7`.
fn parse_count(v: &str, key: &str) -> Result<usize, ConfigError> {
    if let Ok(n) = v.parse::<usize>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 9.0e15 => Ok(x as usize),
        _ => Err(type_err(key, "a non-negative integer", v)),
    }
}
