//! End-to-end memory lifecycle: store sparse patterns, consolidate by
//! pruning weak weights, and retrieve from partial cues of increasing
//! completeness. Within a trial, smaller cues are subsets of larger ones,
//! which makes the per-trial success profile (and hence the merged curve)
//! robustly monotone.

use serde::{Deserialize, Serialize};

use engram_core::assoc_memory::{AssocMemory, RecallConfig};
use engram_core::pattern::{random_sparse_pattern, Coding, PatternSet};

use crate::error::{HarnessError, Result};
use crate::experiments::{write_output, RunContext};
use crate::runner::run_trials;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub n: usize,
    /// Stored pattern count.
    pub m: usize,
    /// Coding level (fraction of active units). Dense (0.5) coding keeps
    /// the stored weights informative under magnitude pruning; with very
    /// sparse codes most weights collapse onto a constant background level
    /// and quantile pruning removes the informative minority instead.
    pub coding_level: f64,
    pub cue_fractions: Vec<f64>,
    pub prune_quantile: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n: 256,
            m: 20,
            coding_level: 0.5,
            cue_fractions: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            prune_quantile: 0.5,
        }
    }
}

pub const DATA_FILE: &str = "lifecycle.csv";
pub const SUMMARY_FILE: &str = "lifecycle_summary.json";

pub fn run(ctx: &RunContext, p: &Params) -> Result<Vec<String>> {
    let params = p.clone();
    let a = p.coding_level;
    if !(0.0 < a && a <= 0.5) {
        return Err(HarnessError::Config(format!(
            "coding_level: {a} outside (0, 0.5]"
        )));
    }
    let fractions = p.cue_fractions.clone();
    let results = run_trials(ctx.seed, ctx.trials, ctx.workers, move |_, rng| {
        let p = &params;
        let mut ps = PatternSet::new(p.n, Coding::Bipolar);
        for i in 0..p.m {
            let mut prng = rng.split(i as u64);
            ps.push(random_sparse_pattern(&mut prng, p.n, a, Coding::Bipolar)?)?;
        }
        let mem = AssocMemory::<f64>::store_patterns(&ps)?;
        let (pruned, retained) = mem.consolidate_prune(p.prune_quantile)?;
        let target = ps.get(0);
        // One active-index order per trial: a cue at fraction f keeps the
        // first round(f*k) of it, so cues are nested across fractions.
        let mut order = target.active_indices();
        let mut cue_rng = rng.split(1000);
        cue_rng.shuffle(&mut order);
        let rcfg = RecallConfig::default();
        let mut successes = Vec::with_capacity(p.cue_fractions.len());
        for &f in &p.cue_fractions {
            let keep = ((f * order.len() as f64).round() as usize).clamp(1, order.len());
            let mut cue = target.clone();
            for &i in &order[keep..] {
                cue.set(i, -1);
            }
            let mut pre_ok = false;
            let mut post_ok = false;
            for (mem_ref, ok) in [(&mem, &mut pre_ok), (&pruned, &mut post_ok)] {
                let mut dyn_rng = rng.split(2000);
                let r = mem_ref.recall(&cue, &rcfg, &mut dyn_rng)?;
                *ok = r.state == *target;
            }
            successes.push((f, pre_ok, post_ok));
        }
        Ok((successes, retained))
    })?;

    let trials = results.len() as f64;
    let mut csv = String::from("cue_fraction,phase,success_rate,trials\n");
    for (fi, &f) in fractions.iter().enumerate() {
        for (phase, pick) in [
            ("pre_prune", 1usize),
            ("post_prune", 2usize),
        ] {
            let hits: usize = results
                .iter()
                .filter(|(_, (succ, _))| match pick {
                    1 => succ[fi].1,
                    _ => succ[fi].2,
                })
                .count();
            csv.push_str(&format!(
                "{f},{phase},{},{}\n",
                hits as f64 / trials,
                results.len()
            ));
        }
    }
    let retained_mean: f64 =
        results.iter().map(|(_, (_, r))| r).sum::<f64>() / trials;
    let summary = serde_json::json!({
        "coding_level": a,
        "mean_retained_weight_fraction": retained_mean,
        "trials": results.len(),
    });
    Ok(vec![
        write_output(ctx.out_dir, DATA_FILE, &csv)?,
        write_output(
            ctx.out_dir,
            SUMMARY_FILE,
            &serde_json::to_string_pretty(&summary)
                .map_err(|e| HarnessError::Runtime(e.to_string()))?,
        )?,
    ])
}
