//! JSON config files. Every field is optional; command-line flags win.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        line: e.line() as u64,
        msg: e.to_string(),
    })
}

/// Flag value if given, else file value, else `default`.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumConfig {
    pub series: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub method: Option<String>,
    pub eps: Option<f64>,
    pub m: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_terms: Option<usize>,
    pub cap_k: Option<usize>,
    pub relaxed: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub preset: Option<String>,
    /// `iterations` (counts only) or `accuracy` (against the closed form).
    pub kind: Option<String>,
    pub series: Option<String>,
    pub grid: Option<Vec<BTreeMap<String, f64>>>,
    pub methods: Option<Vec<String>>,
    pub eps: Option<Vec<f64>>,
    pub max_terms: Option<usize>,
    pub reference_terms: Option<usize>,
    pub stratify: Option<bool>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    pub data: Option<PathBuf>,
    pub prior_mu: Option<(f64, f64)>,
    pub prior_nu: Option<(f64, f64)>,
    pub eps: Option<f64>,
    pub method: Option<String>,
    pub max_terms: Option<usize>,
    pub chains: Option<usize>,
    pub warmup: Option<usize>,
    pub samples: Option<usize>,
    pub scales: Option<(f64, f64)>,
    pub adapt: Option<bool>,
    pub seed: Option<u64>,
    pub init: Option<(f64, f64)>,
    pub draws: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmleConfig {
    pub data: Option<PathBuf>,
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub j: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub representation: Option<String>,
    pub truncation: Option<String>,
    pub eps: Option<f64>,
    pub max_terms: Option<usize>,
    pub numerical_hessian: Option<bool>,
    pub init: Option<(f64, f64)>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}
