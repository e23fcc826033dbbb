//! The experiment registry. Every experiment takes a resolved config,
//! writes plain CSV/JSON files into the output directory, and returns the
//! list of files it wrote; the caller assembles the manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::resolve_section;
use crate::error::{HarnessError, Result};

pub mod assembly;
pub mod capacity;
pub mod gating;
pub mod lifecycle;
pub mod sdm_recall;
pub mod sparsity;
pub mod spass;

/// Everything an experiment needs at run time.
pub struct RunContext<'a> {
    pub seed: u64,
    pub trials: usize,
    pub out_dir: &'a Path,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SpassConvergence,
    HopfieldCapacity,
    SdmRecall,
    SparsitySweep,
    GatingContinual,
    StdpAssembly,
    EngramLifecycle,
}

/// Fully resolved experiment parameters, ready for the manifest.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ResolvedParams {
    Spass(spass::Params),
    Capacity(capacity::Params),
    Sdm(sdm_recall::Params),
    Sparsity(sparsity::Params),
    Gating(gating::Params),
    Assembly(assembly::Params),
    Lifecycle(lifecycle::Params),
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::SpassConvergence,
        ExperimentKind::HopfieldCapacity,
        ExperimentKind::SdmRecall,
        ExperimentKind::SparsitySweep,
        ExperimentKind::GatingContinual,
        ExperimentKind::StdpAssembly,
        ExperimentKind::EngramLifecycle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SpassConvergence => "spass-convergence",
            ExperimentKind::HopfieldCapacity => "hopfield-capacity",
            ExperimentKind::SdmRecall => "sdm-recall",
            ExperimentKind::SparsitySweep => "sparsity-sweep",
            ExperimentKind::GatingContinual => "gating-continual",
            ExperimentKind::StdpAssembly => "stdp-assembly",
            ExperimentKind::EngramLifecycle => "engram-lifecycle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// One-line description for `list`.
    pub fn summary(&self) -> &'static str {
        match self {
            ExperimentKind::SpassConvergence => {
                "integrate the scaled plasticity rule over a parameter grid and compare to the closed-form fixed point"
            }
            ExperimentKind::HopfieldCapacity => {
                "error-free storage capacity of the associative net, dense vs sparse coding"
            }
            ExperimentKind::SdmRecall => {
                "iterative sparse-distributed-memory recall from corrupted cues"
            }
            ExperimentKind::SparsitySweep => {
                "sparse-autoencoder penalty sweep: reconstruction vs code sparsity"
            }
            ExperimentKind::GatingContinual => {
                "two-task continual learning with stochastic gating vs all-open control"
            }
            ExperimentKind::StdpAssembly => {
                "spiking-network assembly formation with paired anti-Hebbian ablation"
            }
            ExperimentKind::EngramLifecycle => {
                "store -> prune -> partial-cue retrieval success curve"
            }
        }
    }

    /// Strict-parse the params section and echo every default.
    pub fn resolve_params(
        &self,
        v: Option<&toml::Value>,
        trials: usize,
    ) -> Result<ResolvedParams> {
        let p = match self {
            ExperimentKind::SpassConvergence => {
                ResolvedParams::Spass(resolve_section(v)?)
            }
            ExperimentKind::HopfieldCapacity => {
                ResolvedParams::Capacity(resolve_section(v)?)
            }
            ExperimentKind::SdmRecall => ResolvedParams::Sdm(resolve_section(v)?),
            ExperimentKind::SparsitySweep => {
                ResolvedParams::Sparsity(resolve_section(v)?)
            }
            ExperimentKind::GatingContinual => {
                ResolvedParams::Gating(resolve_section(v)?)
            }
            ExperimentKind::StdpAssembly => {
                ResolvedParams::Assembly(resolve_section(v)?)
            }
            ExperimentKind::EngramLifecycle => {
                ResolvedParams::Lifecycle(resolve_section(v)?)
            }
        };
        // Single-run experiments fan trials into their own structure; the
        // others use the top-level trial count directly.
        if matches!(
            self,
            ExperimentKind::SpassConvergence | ExperimentKind::HopfieldCapacity
        ) && trials != 1
        {
            return Err(HarnessError::Config(format!(
                "trials: {} is single-trial; set trials = 1",
                self.name()
            )));
        }
        Ok(p)
    }

    /// Execute; returns the data files written, relative to `out_dir`.
    pub fn run(&self, ctx: &RunContext, params: &ResolvedParams) -> Result<Vec<String>> {
        match (self, params) {
            (ExperimentKind::SpassConvergence, ResolvedParams::Spass(p)) => {
                spass::run(ctx, p)
            }
            (ExperimentKind::HopfieldCapacity, ResolvedParams::Capacity(p)) => {
                capacity::run(ctx, p)
            }
            (ExperimentKind::SdmRecall, ResolvedParams::Sdm(p)) => {
                sdm_recall::run(ctx, p)
            }
            (ExperimentKind::SparsitySweep, ResolvedParams::Sparsity(p)) => {
                sparsity::run(ctx, p)
            }
            (ExperimentKind::GatingContinual, ResolvedParams::Gating(p)) => {
                gating::run(ctx, p)
            }
            (ExperimentKind::StdpAssembly, ResolvedParams::Assembly(p)) => {
                assembly::run(ctx, p)
            }
            (ExperimentKind::EngramLifecycle, ResolvedParams::Lifecycle(p)) => {
                lifecycle::run(ctx, p)
            }
            _ => Err(HarnessError::Runtime(
                "experiment/params kind mismatch".into(),
            )),
        }
    }
}

/// Write a data file and return its manifest-relative name.
pub fn write_output(out_dir: &Path, name: &str, body: &str) -> Result<String> {
    let path: PathBuf = out_dir.join(name);
    std::fs::write(&path, body)?;
    Ok(name.to_string())
}
