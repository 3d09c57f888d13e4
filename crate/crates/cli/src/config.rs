//! Experiment configuration: JSON file, `--set` overrides and `FR_SEED`.

use crate::error::CliError;
use fr_core::io::{JsonComplex, SamplingSpec, SystemSpec};
use fr_core::{DifferenceScheme, RecoveryMethod, DEFAULT_CAUCHY_EPS, DEFAULT_MAX_ROWS};
use serde::Deserialize;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

pub const SEED_ENV: &str = "FR_SEED";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub sampling: Option<SamplingSpec>,
    /// Number of simulated rows.
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Sample times for continuous recovery; may include `-h`.
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub scenario: Option<ScenarioConfig>,
    /// Data-matrix CSV to use instead of simulating.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryConfig {
    #[serde(default = "default_method")]
    pub method: RecoveryMethod,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Difference step for continuous recovery.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub scheme: Option<DifferenceScheme>,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self { method: default_method(), eps: default_eps(), n_max: default_n_max(), h: None, scheme: None }
    }
}

fn default_method() -> RecoveryMethod {
    RecoveryMethod::TwoSample
}

fn default_eps() -> f64 {
    DEFAULT_CAUCHY_EPS
}

fn default_n_max() -> usize {
    DEFAULT_MAX_ROWS
}

fn default_scale() -> JsonComplex {
    JsonComplex::Real(1.0)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    /// Diagonal system whose first `horizon` samples vanish.
    Adversarial {
        horizon: usize,
        #[serde(default)]
        lambdas: Option<Vec<f64>>,
        #[serde(default = "default_scale")]
        c: JsonComplex,
        /// Defaults to `horizon + 3`.
        #[serde(default)]
        dim: Option<usize>,
    },
    /// `A = I`, `g_j = e_j / j`.
    Unstable { dim: usize },
    Random {
        dim: usize,
        count: usize,
        rho: f64,
        #[serde(default)]
        subspace_dim: Option<usize>,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

impl Config {
    pub fn seed(&self) -> u64 {
        self.seed.or_else(|| self.system.as_ref().and_then(|s| s.seed)).unwrap_or(0)
    }

    fn validate(&self) -> Result<(), CliError> {
        let r = &self.recovery;
        if !(r.eps > 0.0 && r.eps.is_finite()) {
            return Err(CliError::config("recovery.eps must be positive"));
        }
        if r.n_max < 2 {
            return Err(CliError::config("recovery.n_max must be at least 2"));
        }
        if let Some(h) = r.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::config("recovery.h must be positive"));
            }
        }
        if self.horizon == Some(0) {
            return Err(CliError::config("horizon must be positive"));
        }
        if let Some(path) = &self.data {
            if !path.is_file() {
                return Err(CliError::config(format!("data file {} does not exist", path.display())));
            }
        }
        Ok(())
    }
}

/// Reads the config file (or starts empty), applies `--set` overrides and
/// then `FR_SEED`.
pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Config, CliError> {
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("config {} is not valid JSON: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    for s in sets {
        apply_set(&mut value, s)?;
    }
    if let Ok(seed) = std::env::var(SEED_ENV) {
        let seed: u64 = seed.trim().parse().map_err(|_| CliError::config(format!("{SEED_ENV} must be an integer")))?;
        as_object(&mut value, "")?.insert("seed".into(), Value::from(seed));
    }
    let config: Config = serde_json::from_value(value).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// `a.b.c=value`; the value is parsed as JSON when possible, else kept as a
/// string.
pub fn apply_set(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects key=value, got {assignment:?}")))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("bad --set key {key:?}")));
    }
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let obj = as_object(node, key)?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), parsed);
            return Ok(());
        }
        node = obj.entry((*part).to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("loop returns on the last key")
}

fn as_object<'a>(v: &'a mut Value, key: &str) -> Result<&'a mut Map<String, Value>, CliError> {
    if v.is_null() {
        *v = Value::Object(Map::new());
    }
    v.as_object_mut().ok_or_else(|| CliError::config(format!("--set {key}: path runs through a non-object value")))
}
