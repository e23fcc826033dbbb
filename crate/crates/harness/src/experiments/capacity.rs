//! Storage capacity of the associative net at several sizes: dense
//! bipolar coding (level 0.5) against sparse binary coding (level
//! log2(N)/N), where the weights act as co-activation counters and
//! capacity grows faster than linearly in the unit count.

use serde::{Deserialize, Serialize};

use engram_core::assoc_memory::{measure_capacity, CapacityConfig};
use engram_core::pattern::Coding;
use engram_core::rng::SeedStream;

use crate::error::Result;
use crate::experiments::{write_output, RunContext};
use crate::runner::run_trials;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub sizes: Vec<usize>,
    pub max_bit_error_rate: f64,
    pub trials_per_m: usize,
    pub max_iterations: usize,
}

impl Default for Params {
    fn default() -> Self {
        let c = CapacityConfig::default();
        Self {
            sizes: vec![128, 256, 512],
            max_bit_error_rate: c.max_bit_error_rate,
            trials_per_m: c.trials_per_m,
            max_iterations: c.max_iterations,
        }
    }
}

pub const DATA_FILE: &str = "capacity.csv";

/// Sparse coding level used throughout: log2(N)/N.
pub fn sparse_level(n: usize) -> f64 {
    (n as f64).log2() / n as f64
}

pub fn run(ctx: &RunContext, p: &Params) -> Result<Vec<String>> {
    // One job per (size, coding); job index doubles as the seed index so
    // the measurements are independent of scheduling. Dense jobs use
    // bipolar patterns; sparse jobs use binary patterns, the coding in
    // which sparse capacity has its advantage.
    let jobs: Vec<(usize, &'static str, f64, Coding)> = p
        .sizes
        .iter()
        .flat_map(|&n| {
            [
                ("dense", 0.5, Coding::Bipolar),
                ("sparse", sparse_level(n), Coding::Binary),
            ]
            .into_iter()
            .map(move |(label, a, coding)| (n, label, a, coding))
        })
        .collect();
    let results = run_trials(
        ctx.seed,
        jobs.len(),
        ctx.workers.min(jobs.len()),
        |i, rng: SeedStream| {
            let (n, label, a, coding) = jobs[i];
            let cfg = CapacityConfig {
                max_bit_error_rate: p.max_bit_error_rate,
                trials_per_m: p.trials_per_m,
                max_iterations: p.max_iterations,
                coding,
                ..CapacityConfig::default()
            };
            let r = measure_capacity::<f64>(&rng, n, a, &cfg)?;
            Ok((n, label, a, r.m_max))
        },
    )?;
    let mut csv = String::from("n,coding,coding_level,m_max\n");
    for (_seed, (n, label, a, m_max)) in &results {
        csv.push_str(&format!("{n},{label},{a},{m_max}\n"));
    }
    Ok(vec![write_output(ctx.out_dir, DATA_FILE, &csv)?])
}
