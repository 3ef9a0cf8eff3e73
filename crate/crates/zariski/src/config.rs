//! Job parameters: command-line flags merged over an optional JSON job file.

use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use zariski_core::arith::parse_rational;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// Input documents by role.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub group: Option<PathBuf>,
    pub set: Option<PathBuf>,
    pub family: Option<PathBuf>,
    pub reqs: Option<PathBuf>,
    pub stream: Option<PathBuf>,
    pub points: Option<PathBuf>,
    pub reals: Option<PathBuf>,
    pub alpha: Option<PathBuf>,
    pub x0: Option<PathBuf>,
    pub boxes: Option<PathBuf>,
}

/// A batch job. Every field is optional; flags given on the command line
/// win over the file. Rationals are `"p/q"` strings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Option<String>,
    #[serde(default)]
    pub inputs: Inputs,
    pub prefix: Option<usize>,
    pub dim: Option<usize>,
    pub epsilon: Option<String>,
    pub level: Option<u64>,
    pub divisor_bound: Option<u64>,
    pub threshold: Option<usize>,
    pub backtrack_budget: Option<usize>,
    pub max_walk: Option<usize>,
    pub window: Option<usize>,
    pub k_max: Option<i64>,
    pub m: Option<u64>,
    pub modulus_bound: Option<u64>,
    pub coset_bound: Option<usize>,
    pub reorder: Option<bool>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::json(path, &e))
    }

    /// `self` with every field set in `top` replaced.
    pub fn overlay(mut self, top: &JobConfig) -> Self {
        overlay!(self, top; command, prefix, dim, epsilon, level, divisor_bound, threshold, backtrack_budget,
            max_walk, window, k_max, m, modulus_bound, coset_bound, reorder, seed, output, format);
        overlay!(self.inputs, top.inputs; group, set, family, reqs, stream, points, reals, alpha, x0, boxes);
        self
    }

    pub fn epsilon(&self) -> Result<Option<BigRational>> {
        self.epsilon.as_deref().map(parse_rational).transpose().map_err(CliError::from)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

/// Fetches a required input path.
pub fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| CliError::Usage(format!("missing required input --{flag}")))
}
