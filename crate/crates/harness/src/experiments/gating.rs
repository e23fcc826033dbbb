//! Two-task continual learning: the gated binary network against the
//! all-gates-open control under identical seeds and training budget.
//! The two tasks share their inputs but carry opposite labels, the
//! strongest form of interference: an ungated network cannot satisfy both
//! mappings in one set of weights, while gating routes each task through
//! its own subnetwork. Each trial trains both variants and reports the
//! full accuracy matrix.

use serde::{Deserialize, Serialize};

use engram_core::engram_gate::{
    tiny_digit_task, train_continual, GatedBinaryNet, GatedNetConfig, TaskSuite,
};
use engram_core::rng::SeedStream;

use crate::error::Result;
use crate::experiments::{write_output, RunContext};
use crate::runner::run_trials;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub hidden: usize,
    pub steps_per_task: usize,
    pub learning_rate: f64,
    pub gate_bias: f64,
    pub gate_gain: f64,
    pub meta_m: f64,
    /// Pixel noise in the task samples.
    pub noise: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for Params {
    fn default() -> Self {
        let c = GatedNetConfig::default();
        Self {
            hidden: c.hidden,
            steps_per_task: c.steps_per_task,
            learning_rate: c.learning_rate,
            gate_bias: c.gate_bias,
            gate_gain: c.gate_gain,
            meta_m: c.meta_m,
            noise: 0.15,
            n_train: 60,
            n_test: 40,
        }
    }
}

pub const DATA_FILE: &str = "gating_continual.csv";
pub const SUMMARY_FILE: &str = "gating_summary.json";

#[derive(Debug, Serialize)]
struct Summary {
    /// Task-0 accuracy after training task 1, per seed: (seed, gated,
    /// control).
    per_seed_retention: Vec<(u64, f64, f64)>,
    median_retention_gated: f64,
    median_retention_control: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Build the 2-task suite and run one (gated or control) training pass.
fn run_variant(rng: &SeedStream, p: &Params, gated: bool) -> Result<engram_core::engram_gate::ContinualResult> {
    // The suite and all training randomness come from the same split
    // points for both variants, so the comparison is seed-paired.
    let mut suite_rng = rng.split(0);
    let t0 = tiny_digit_task(&mut suite_rng, false, p.noise, p.n_train, p.n_test);
    let mut t1 = tiny_digit_task(&mut suite_rng, false, p.noise, p.n_train, p.n_test);
    for y in t1.train_y.iter_mut().chain(t1.test_y.iter_mut()) {
        *y = 1 - *y;
    }
    let suite = TaskSuite::new(vec![t0, t1], 2)?;
    let cfg = GatedNetConfig {
        hidden: p.hidden,
        steps_per_task: p.steps_per_task,
        learning_rate: p.learning_rate,
        gate_bias: p.gate_bias,
        gate_gain: p.gate_gain,
        meta_m: p.meta_m,
        gates_forced_open: !gated,
        ..GatedNetConfig::default()
    };
    let mut net_rng = rng.split(1);
    let n_in = suite.tasks[0].train_x[0].len();
    let mut net = GatedBinaryNet::init(&mut net_rng, n_in, 2, suite.tasks.len(), cfg);
    let mut train_rng = rng.split(2);
    Ok(train_continual(&mut net, &suite, &mut train_rng)?)
}

pub fn run(ctx: &RunContext, p: &Params) -> Result<Vec<String>> {
    let params = p.clone();
    let results = run_trials(ctx.seed, ctx.trials, ctx.workers, move |_, rng| {
        let gated = run_variant(&rng, &params, true)?;
        let control = run_variant(&rng, &params, false)?;
        Ok((gated, control))
    })?;

    let mut csv = String::from("after_task,eval_task,accuracy,seed,gated_flag\n");
    let mut per_seed = Vec::new();
    for (seed, (gated, control)) in &results {
        for body in [gated.to_csv(*seed, true), control.to_csv(*seed, false)] {
            csv.push_str(body.split_once('\n').map(|(_, rest)| rest).unwrap_or(""));
        }
        per_seed.push((*seed, gated.retention(0, 1), control.retention(0, 1)));
    }
    let summary = Summary {
        median_retention_gated: median(per_seed.iter().map(|r| r.1).collect()),
        median_retention_control: median(per_seed.iter().map(|r| r.2).collect()),
        per_seed_retention: per_seed,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| crate::error::HarnessError::Runtime(e.to_string()))?;
    Ok(vec![
        write_output(ctx.out_dir, DATA_FILE, &csv)?,
        write_output(ctx.out_dir, SUMMARY_FILE, &json)?,
    ])
}
