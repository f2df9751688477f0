//! Problem files: one `key = value` per line, `#` starts a comment, string
//! values (expressions, paths) in double quotes.
//!
//! ```text
//! n = 3
//! phi = "8"
//! psi = "8 - 4*t^2"
//! t_max = 0.5
//! step = 1e-3        # optional
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ricci_core::exprfn::{ParseError, ScalarFn};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unterminated string")]
    Unterminated { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    Value {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("line {line}: `{key}`: {source}")]
    Expr {
        line: usize,
        key: String,
        source: ParseError,
    },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

const KEYS: [&str; 13] = [
    "n",
    "phi",
    "psi",
    "t_max",
    "step",
    "delta",
    "constraint_tol",
    "residual_tol",
    "output",
    "h",
    "r_max",
    "samples",
    "profile",
];

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_CONSTRAINT_TOL: f64 = 1e-9;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 101;

/// A parsed problem file. Which keys are required depends on the command;
/// see the `require_*` accessors.
#[derive(Clone, Debug)]
pub struct ProblemConfig {
    pub n: usize,
    pub phi: Option<ScalarFn>,
    pub psi: Option<ScalarFn>,
    pub t_max: Option<f64>,
    pub step: f64,
    pub delta: Option<f64>,
    pub constraint_tol: f64,
    pub residual_tol: f64,
    /// Output prefix, relative paths taken from the config directory.
    pub output: Option<PathBuf>,
    pub h: Option<ScalarFn>,
    pub r_max: Option<f64>,
    pub samples: usize,
    /// Profile CSV for `verify`, relative to the config directory.
    pub profile: Option<PathBuf>,
}

/// Splits off a trailing comment that is not inside quotes.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(raw: &str, line: usize) -> Result<String, ConfigError> {
    match raw.strip_prefix('"') {
        Some(rest) => match rest.strip_suffix('"') {
            Some(inner) if !inner.contains('"') => Ok(inner.to_string()),
            _ => Err(ConfigError::Unterminated { line }),
        },
        None if raw.contains('"') => Err(ConfigError::Unterminated { line }),
        None => Ok(raw.to_string()),
    }
}

fn positive(key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    match value.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(ConfigError::Value {
            line,
            key: key.into(),
            expected: "a positive number",
            value: value.into(),
        }),
    }
}

/// Integers >= 2 (`n` and `samples`).
fn count(key: &str, value: &str, line: usize) -> Result<usize, ConfigError> {
    match value.parse::<usize>() {
        Ok(v) if v >= 2 => Ok(v),
        _ => Err(ConfigError::Value {
            line,
            key: key.into(),
            expected: "an integer >= 2",
            value: value.into(),
        }),
    }
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut seen = BTreeSet::new();
        let mut n = None;
        let mut cfg = ProblemConfig {
            n: 0,
            phi: None,
            psi: None,
            t_max: None,
            step: DEFAULT_STEP,
            delta: None,
            constraint_tol: DEFAULT_CONSTRAINT_TOL,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            output: None,
            h: None,
            r_max: None,
            samples: DEFAULT_SAMPLES,
            profile: None,
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), unquote(value.trim(), line)?);
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: key.into() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate { line, key: key.into() });
            }
            let expr = |v: &str| {
                ScalarFn::parse(v).map_err(|source| ConfigError::Expr {
                    line,
                    key: key.into(),
                    source,
                })
            };
            match key {
                "n" => n = Some(count(key, &value, line)?),
                "phi" => cfg.phi = Some(expr(&value)?),
                "psi" => cfg.psi = Some(expr(&value)?),
                "h" => cfg.h = Some(expr(&value)?),
                "t_max" => cfg.t_max = Some(positive(key, &value, line)?),
                "step" => cfg.step = positive(key, &value, line)?,
                "delta" => cfg.delta = Some(positive(key, &value, line)?),
                "constraint_tol" => cfg.constraint_tol = positive(key, &value, line)?,
                "residual_tol" => cfg.residual_tol = positive(key, &value, line)?,
                "r_max" => cfg.r_max = Some(positive(key, &value, line)?),
                "samples" => cfg.samples = count(key, &value, line)?,
                "output" => cfg.output = Some(base.join(value)),
                "profile" => cfg.profile = Some(base.join(value)),
                _ => unreachable!("key list and match arms disagree"),
            }
        }
        cfg.n = n.ok_or(ConfigError::Missing("n"))?;
        Ok(cfg)
    }

    pub fn require_phi_psi(&self) -> Result<(ScalarFn, ScalarFn), ConfigError> {
        let phi = self.phi.clone().ok_or(ConfigError::Missing("phi"))?;
        let psi = self.psi.clone().ok_or(ConfigError::Missing("psi"))?;
        Ok((phi, psi))
    }

    pub fn require_t_max(&self) -> Result<f64, ConfigError> {
        let t_max = self.t_max.ok_or(ConfigError::Missing("t_max"))?;
        if self.step > t_max {
            return Err(ConfigError::Invalid(format!(
                "step {} exceeds t_max {t_max}",
                self.step
            )));
        }
        Ok(t_max)
    }

    /// Seed offset, defaulting to `1e-4·t_max`.
    pub fn delta_for(&self, t_max: f64) -> f64 {
        self.delta.unwrap_or(1e-4 * t_max)
    }
}
