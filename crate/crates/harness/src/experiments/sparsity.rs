//! Sparsity-penalty sweep for the sparse autoencoder on synthetic 8x8
//! patches: for each penalty weight, train to convergence and report
//! reconstruction quality, code activity, and a capacity proxy
//! (reconstruction gain per active hidden unit). The curve is emitted
//! as data; no claim about the location of its maximum is asserted.

use serde::{Deserialize, Serialize};

use engram_core::regularizers::{SparseAutoencoder, TrainConfig};
use engram_core::rng::SeedStream;

use crate::datasets::{all_mean_baseline, synthetic_patches, PATCH_DIM};
use crate::error::Result;
use crate::experiments::{write_output, RunContext};
use crate::runner::run_trials;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub betas: Vec<f64>,
    pub rho: f64,
    pub hidden: usize,
    pub n_patches: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            betas: vec![0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0],
            rho: 0.05,
            hidden: 64,
            n_patches: 200,
            epochs: 4000,
            learning_rate: 0.3,
        }
    }
}

pub const DATA_FILE: &str = "sparsity_sweep.csv";

/// Reconstruction gain per active hidden unit: how much of the
/// all-mean-baseline error the code removes, divided by the mean number
/// of strongly active units per sample.
pub fn capacity_proxy(baseline: f64, recon: f64, active_units: f64) -> f64 {
    let gain = ((baseline - recon) / baseline).max(0.0);
    gain / active_units.max(1e-9)
}

pub fn run(ctx: &RunContext, p: &Params) -> Result<Vec<String>> {
    let params = p.clone();
    let betas = p.betas.clone();
    let base_seed = ctx.seed;
    let results = run_trials(
        ctx.seed,
        betas.len(),
        ctx.workers.min(betas.len()),
        move |i, _rng| {
            let p = &params;
            let beta = p.betas[i];
            // All sweep points share the dataset and initialization stream
            // so the only difference is the penalty weight.
            let mut data_rng = SeedStream::new(base_seed).split(0);
            let mut init_rng = SeedStream::new(base_seed).split(1);
            let data = synthetic_patches(&mut data_rng, p.n_patches);
            let mut ae =
                SparseAutoencoder::init(&mut init_rng, PATCH_DIM, p.hidden, p.rho, beta)?;
            let cfg = TrainConfig {
                epochs: p.epochs,
                learning_rate: p.learning_rate,
                record_stride: p.epochs,
            };
            ae.train(&data, &cfg)?;
            let (_, recon, mean_act) = ae.objective(&data)?;
            // Strongly active units per sample (activation above 2x the
            // target rate).
            let mut active = 0.0;
            for x in &data {
                active += ae
                    .encode(x)
                    .iter()
                    .filter(|&&h| h > 2.0 * p.rho)
                    .count() as f64;
            }
            let active_units = active / data.len() as f64;
            let baseline = all_mean_baseline(&data);
            Ok((beta, recon, mean_act, active_units, baseline))
        },
    )?;
    let mut csv = String::from(
        "beta,recon_loss,baseline_loss,mean_activation,active_units,capacity_proxy\n",
    );
    for (_seed, (beta, recon, mean_act, active_units, baseline)) in &results {
        let proxy = capacity_proxy(*baseline, *recon, *active_units);
        csv.push_str(&format!(
            "{beta},{recon},{baseline},{mean_act},{active_units},{proxy}\n"
        ));
    }
    Ok(vec![write_output(ctx.out_dir, DATA_FILE, &csv)?])
}
