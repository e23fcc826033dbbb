//! Iterative recall from corrupted cues in the sparse distributed memory:
//! each trial builds a fresh store, writes autoassociative patterns, then
//! reads back one pattern from a corrupted cue.

use serde::{Deserialize, Serialize};

use engram_core::pattern::{Coding, Pattern};
use engram_core::rng::SeedStream;
use engram_core::sdm::{SdmConfig, SdmStore};

use crate::error::Result;
use crate::experiments::{write_output, RunContext};
use crate::runner::run_trials;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Word length (bits).
    pub n: usize,
    /// Hard-location count.
    pub h: usize,
    /// Stored pattern count.
    pub m: usize,
    /// Fraction of cue bits flipped before reading.
    pub corrupt_fraction: f64,
    /// Target hard-location activation probability; the Hamming radius is
    /// derived from it. Near (2*M*H)^(-1/3), the classical sweet spot.
    pub activation_probability: f64,
    pub max_iterations: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n: 256,
            h: 2000,
            m: 20,
            corrupt_fraction: 0.1,
            activation_probability: 0.02,
            max_iterations: 20,
        }
    }
}

pub const DATA_FILE: &str = "sdm_recall.csv";

fn random_word(rng: &mut SeedStream, n: usize) -> Pattern {
    let bits: Vec<i8> = (0..n).map(|_| rng.bernoulli(0.5) as i8).collect();
    Pattern::new(bits, Coding::Binary).expect("valid bits")
}

pub fn run(ctx: &RunContext, p: &Params) -> Result<Vec<String>> {
    let params = p.clone();
    let results = run_trials(ctx.seed, ctx.trials, ctx.workers, move |_, rng| {
        let p = &params;
        let mut store_rng = rng.split(0);
        let cfg = SdmConfig {
            radius: SdmConfig::radius_for_activation(p.n, p.activation_probability),
            ..SdmConfig::with_default_radius(p.n, p.h)
        };
        let mut store = SdmStore::new(&mut store_rng, &cfg)?;
        let mut patterns = Vec::with_capacity(p.m);
        for i in 0..p.m {
            let mut prng = rng.split(1 + i as u64);
            let w = random_word(&mut prng, p.n);
            store.write(&w, &w)?;
            patterns.push(w);
        }
        let mut pick_rng = rng.split(u64::MAX);
        let idx = pick_rng.below(p.m);
        let flips = ((p.corrupt_fraction * p.n as f64).round() as usize).max(1);
        let cue = patterns[idx].with_flipped(&mut pick_rng, flips);
        let r = store.read_iterative(&cue, p.max_iterations)?;
        let exact = r.data == patterns[idx];
        Ok((idx, flips, r.iterations, r.converged, exact))
    })?;
    let mut csv =
        String::from("trial_seed,pattern_index,bits_flipped,iterations,converged,exact\n");
    for (seed, (idx, flips, iters, converged, exact)) in &results {
        csv.push_str(&format!(
            "{seed},{idx},{flips},{iters},{},{}\n",
            *converged as u8, *exact as u8
        ));
    }
    Ok(vec![write_output(ctx.out_dir, DATA_FILE, &csv)?])
}
