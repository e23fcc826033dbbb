//! Spiking-network assembly formation: each trial runs the full model and
//! the anti-Hebbian-inhibition ablation from the same seed, writing both
//! reports plus the modularity time series.

use serde::{Deserialize, Serialize};

use engram_core::stdp_snn::{run_assembly_experiment, AssemblyConfig, AssemblyReport};

use crate::error::{HarnessError, Result};
use crate::experiments::{write_output, RunContext};
use crate::runner::run_trials;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub train_ms: f64,
    pub rest_ms: f64,
    pub n_exc: usize,
    pub n_inh: usize,
    pub n_assemblies: usize,
    /// Also run the anti-Hebbian ablation on the same seeds.
    pub run_ablation: bool,
}

impl Default for Params {
    fn default() -> Self {
        let c = AssemblyConfig::default();
        Self {
            train_ms: c.train_ms,
            rest_ms: c.rest_ms,
            n_exc: c.net.n_exc,
            n_inh: c.net.n_inh,
            n_assemblies: c.n_assemblies,
            run_ablation: true,
        }
    }
}

pub const DATA_FILE: &str = "assembly_summary.csv";
pub const SERIES_FILE: &str = "assembly_modularity_series.csv";
pub const REPORTS_FILE: &str = "assembly_reports.json";

fn config_for(p: &Params, ablate: bool) -> AssemblyConfig {
    let mut cfg = AssemblyConfig::default();
    cfg.train_ms = p.train_ms;
    cfg.rest_ms = p.rest_ms;
    cfg.net.n_exc = p.n_exc;
    cfg.net.n_inh = p.n_inh;
    cfg.n_assemblies = p.n_assemblies;
    cfg.net.ablate_anti_hebbian = ablate;
    cfg
}

fn summary_row(seed: u64, variant: &str, r: &AssemblyReport) -> String {
    format!(
        "{seed},{variant},{},{},{},{},{},{},{},{}\n",
        r.modularity_final,
        r.selectivity_mean,
        r.recall_cued_fraction,
        r.recall_other_fraction,
        r.train_rate_hz,
        r.rest_rate_hz,
        r.rest_mean_pairwise_correlation,
        r.rest_isi_cv_mean
    )
}

pub fn run(ctx: &RunContext, p: &Params) -> Result<Vec<String>> {
    let params = p.clone();
    let results = run_trials(ctx.seed, ctx.trials, ctx.workers, move |_, rng| {
        let full = run_assembly_experiment(&rng, &config_for(&params, false))?;
        let ablated = if params.run_ablation {
            Some(run_assembly_experiment(&rng, &config_for(&params, true))?)
        } else {
            None
        };
        Ok((full, ablated))
    })?;

    let mut csv = String::from(
        "seed,variant,modularity,selectivity,recall_cued,recall_other,train_rate_hz,rest_rate_hz,rest_correlation,rest_isi_cv\n",
    );
    let mut series = String::from("seed,variant,time_ms,modularity\n");
    let mut reports: Vec<&AssemblyReport> = Vec::new();
    for (seed, (full, ablated)) in &results {
        csv.push_str(&summary_row(*seed, "full", full));
        for &(t, m) in &full.modularity_series {
            series.push_str(&format!("{seed},full,{t},{m}\n"));
        }
        reports.push(full);
        if let Some(a) = ablated {
            csv.push_str(&summary_row(*seed, "ablated", a));
            for &(t, m) in &a.modularity_series {
                series.push_str(&format!("{seed},ablated,{t},{m}\n"));
            }
            reports.push(a);
        }
    }
    let json = serde_json::to_string_pretty(&reports)
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    Ok(vec![
        write_output(ctx.out_dir, DATA_FILE, &csv)?,
        write_output(ctx.out_dir, SERIES_FILE, &series)?,
        write_output(ctx.out_dir, REPORTS_FILE, &json)?,
    ])
}
