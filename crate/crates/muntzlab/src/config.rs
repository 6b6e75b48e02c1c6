//! Run configuration files; command-line flags override them.

use std::path::{Path, PathBuf};

use muntzlab_core::QuadratureConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
    pub tail_cutoff: Option<f64>,
}

impl QuadratureOverrides {
    pub fn apply(&self, base: QuadratureConfig) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: self.abs_tol.unwrap_or(base.abs_tol),
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            max_subdivisions: self.max_subdivisions.unwrap_or(base.max_subdivisions),
            tail_cutoff: self.tail_cutoff.unwrap_or(base.tail_cutoff),
        }
    }

    /// `other` wins where set.
    pub fn merged(&self, other: &Self) -> Self {
        Self {
            abs_tol: other.abs_tol.or(self.abs_tol),
            rel_tol: other.rel_tol.or(self.rel_tol),
            max_subdivisions: other.max_subdivisions.or(self.max_subdivisions),
            tail_cutoff: other.tail_cutoff.or(self.tail_cutoff),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// built-in name, expression or kernel file
    pub kernel: Option<String>,
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
    #[serde(default)]
    pub output: OutputConfig,
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
}

pub fn load_run_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
}
