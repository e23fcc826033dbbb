//! Result manifests: one JSON file per run, written atomically after all
//! data files, recording everything needed to reproduce the outputs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ResolvedConfig;
use crate::error::{HarnessError, Result};

#[derive(Debug, Serialize)]
pub struct ResultManifest {
    pub experiment: String,
    pub artifact_version: String,
    pub config: ResolvedConfig,
    /// Per-trial seeds in execution-independent (sorted) order.
    pub trial_seeds: Vec<u64>,
    /// Data files written by the run, relative to the output directory.
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Write `manifest.json` into the output directory via a temporary file
/// and rename, so a crash never leaves a partial manifest.
pub fn write_atomic(dir: &Path, manifest: &ResultManifest) -> Result<PathBuf> {
    let body = serde_json::to_vec_pretty(manifest)
        .map_err(|e| HarnessError::Runtime(format!("manifest encode: {e}")))?;
    let tmp = dir.join(".manifest.json.tmp");
    let fin = dir.join(MANIFEST_FILE);
    std::fs::write(&tmp, body)?;
    std::fs::rename(&tmp, &fin)?;
    Ok(fin)
}

/// Read a manifest back as loose JSON (plot emission only needs the
/// experiment name and output list).
#[derive(Debug, serde::Deserialize)]
pub struct LoadedManifest {
    pub experiment: String,
    pub outputs: Vec<String>,
}

pub fn load(path: &Path) -> Result<LoadedManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read {}: {e}", path.display()),
        ))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Runtime(format!("manifest parse: {e}")))
}
