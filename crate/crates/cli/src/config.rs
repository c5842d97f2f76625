//! JSON experiment configs.
//!
//! Every experiment has its own schema (see the README) plus the common keys
//! `experiment`, `out`, `seed` and `shift`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use beppo::Grid;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{Result, RunError};

pub const DEFAULT_SEED: u64 = 1;

/// A config file kept as text so diagnostics can point at lines.
pub struct Source {
    path: PathBuf,
    text: String,
    value: Value,
}

impl Source {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config {
            path: path.display().to_string(),
            line: None,
            message: format!("cannot read config: {e}"),
        })?;
        Self::from_text(path, text)
    }

    pub fn from_text(path: &Path, text: String) -> Result<Self> {
        let mut source = Self {
            path: path.to_path_buf(),
            text,
            value: Value::Null,
        };
        source.value = serde_json::from_str(&source.text).map_err(|e| source.json_error(e))?;
        if !source.value.is_object() {
            return Err(source.error_at(Some(1), "config must be a JSON object".into()));
        }
        Ok(source)
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_str(&self.text).map_err(|e| self.json_error(e))
    }

    fn json_error(&self, e: serde_json::Error) -> RunError {
        let text = e.to_string();
        let message = match text.find(" at line ") {
            Some(i) => text[..i].to_string(),
            None => text,
        };
        let line = (e.line() > 0).then_some(e.line());
        self.error_at(line, message)
    }

    fn error_at(&self, line: Option<usize>, message: String) -> RunError {
        RunError::Config {
            path: self.path.display().to_string(),
            line,
            message,
        }
    }

    /// Diagnostic for `key`, located at the first line mentioning it.
    pub fn error(&self, key: &str, message: impl std::fmt::Display) -> RunError {
        let needle = format!("\"{key}\"");
        let line = self
            .text
            .lines()
            .position(|l| l.contains(&needle))
            .map(|i| i + 1);
        self.error_at(line, format!("`{key}`: {message}"))
    }

    /// Paths in a config are relative to the config file.
    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            return p.to_path_buf();
        }
        self.path
            .parent()
            .map(|dir| dir.join(p))
            .unwrap_or_else(|| p.to_path_buf())
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub half_width: f64,
    pub n: usize,
}

impl GridConfig {
    pub fn build(&self, source: &Source, key: &str, m: usize) -> Result<Grid> {
        Grid::new(self.d, m, self.half_width, self.n).map_err(|e| source.error(key, e))
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..*self }
    }
}

/// Keys shared by every experiment.
pub trait Common {
    fn experiment(&self) -> Option<&str>;
    fn out(&self) -> Option<&Path>;
    fn seed(&self) -> Option<u64>;
    fn shift(&self) -> f64;
}

/// Declares an experiment schema with the common keys added.
macro_rules! experiment_config {
    ($(#[$meta:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            #[serde(default)]
            pub experiment: Option<String>,
            #[serde(default)]
            pub out: Option<std::path::PathBuf>,
            #[serde(default)]
            pub seed: Option<u64>,
            /// Constant added to every class-valued input field.
            #[serde(default)]
            pub shift: f64,
            $($(#[$fm])* pub $field: $ty,)*
        }

        impl $crate::config::Common for $name {
            fn experiment(&self) -> Option<&str> {
                self.experiment.as_deref()
            }
            fn out(&self) -> Option<&std::path::Path> {
                self.out.as_deref()
            }
            fn seed(&self) -> Option<u64> {
                self.seed
            }
            fn shift(&self) -> f64 {
                self.shift
            }
        }
    };
}

pub(crate) use experiment_config;

/// Amplitudes and centers of a manufactured Gaussian solution
/// `u_j = a_j exp(−|x − c_j|²)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manufactured {
    pub amplitudes: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
}

impl Manufactured {
    pub fn check(&self, source: &Source, key: &str, d: usize) -> Result<()> {
        if self.amplitudes.is_empty() || self.amplitudes.len() != self.centers.len() {
            return Err(source.error(key, "need one center per amplitude"));
        }
        if self.centers.iter().any(|c| c.len() != d) {
            return Err(source.error(key, format!("centers must have {d} coordinates")));
        }
        Ok(())
    }
}

pub fn positive(source: &Source, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(source.error(key, format!("must be positive, got {v}")))
    }
}

pub fn non_empty<T>(source: &Source, key: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(source.error(key, "must not be empty"))
    } else {
        Ok(())
    }
}
