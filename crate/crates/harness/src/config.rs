//! Strict experiment configuration: a single TOML file, unknown keys
//! rejected, and every applied default echoed back out through the
//! resolved config that lands in the manifest.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiments::{self, ExperimentKind};

/// The configuration file as written by the user.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// Registered experiment name.
    pub experiment: String,
    /// Base seed; trial i uses a seed derived from it by a fixed mix.
    pub seed: u64,
    /// Number of independently seeded trials.
    #[serde(default = "one")]
    pub trials: usize,
    /// Directory all outputs are written into (created if missing).
    pub output_dir: PathBuf,
    /// Experiment-specific section; omitted fields take documented
    /// defaults, unknown fields are rejected.
    #[serde(default)]
    pub params: Option<toml::Value>,
}

fn one() -> usize {
    1
}

/// The configuration after defaults are applied; embedded verbatim in the
/// manifest so a result file never depends on out-of-band defaults.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub experiment: String,
    pub seed: u64,
    pub trials: usize,
    pub output_dir: PathBuf,
    pub params: experiments::ResolvedParams,
}

pub fn load_raw(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Config(format!("cannot read {}: {e}", path.display()))
    })?;
    toml::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))
}

/// Parse an experiment-specific params table with per-field defaults.
pub fn resolve_section<P: DeserializeOwned + Default>(
    v: Option<&toml::Value>,
) -> Result<P> {
    match v {
        None => Ok(P::default()),
        Some(val) => P::deserialize(val.clone())
            .map_err(|e| HarnessError::Config(format!("params: {e}"))),
    }
}

/// Validate a raw config fully: experiment name, trial count, params.
pub fn resolve(raw: &RawConfig) -> Result<ResolvedConfig> {
    let kind = ExperimentKind::from_name(&raw.experiment).ok_or_else(|| {
        HarnessError::Usage(format!(
            "unknown experiment '{}'; run `list` for the registry",
            raw.experiment
        ))
    })?;
    if raw.trials == 0 {
        return Err(HarnessError::Config("trials: must be >= 1".into()));
    }
    let params = kind.resolve_params(raw.params.as_ref(), raw.trials)?;
    Ok(ResolvedConfig {
        experiment: raw.experiment.clone(),
        seed: raw.seed,
        trials: raw.trials,
        output_dir: raw.output_dir.clone(),
        params,
    })
}
