//! Grid convergence of the scaled plasticity rule: integrate the ODE in
//! single-synapse linear mode for every grid point and compare the final
//! weight against the closed-form fixed point.

use serde::{Deserialize, Serialize};

use engram_core::plasticity::{
    integrate, spass_fixed_point_weight, IntegrateConfig, PlasticityParams, Rule,
    SynapseState,
};

use crate::error::Result;
use crate::experiments::{write_output, RunContext};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Values taken by each of (presynaptic activity, target activity,
    /// rate ratio) to form the full cube.
    pub grid: Vec<f64>,
    pub mu: f64,
    pub dt: f64,
    pub t_max: f64,
    pub w0: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            grid: vec![0.5, 1.0, 2.0],
            mu: 1.0,
            dt: 1e-3,
            t_max: 50.0,
            w0: 0.2,
        }
    }
}

pub const DATA_FILE: &str = "spass_convergence.csv";

pub fn run(ctx: &RunContext, p: &Params) -> Result<Vec<String>> {
    let mut csv = String::from("u,v_target,kappa,w_final,w_star,rel_err\n");
    for &u in &p.grid {
        for &v_t in &p.grid {
            for &kappa in &p.grid {
                let params = PlasticityParams::from_kappa(p.mu, kappa, v_t)?;
                let w_star: f64 = spass_fixed_point_weight(u, &params)?;
                let mut cfg = IntegrateConfig::new(p.dt, p.t_max, true);
                cfg.record_stride = usize::MAX;
                let tr = integrate(
                    Rule::Spass,
                    SynapseState::new(p.w0, u, p.w0 * u),
                    &params,
                    &cfg,
                )?;
                let rel = ((tr.final_w - w_star) / w_star).abs();
                csv.push_str(&format!(
                    "{u},{v_t},{kappa},{},{},{}\n",
                    tr.final_w, w_star, rel
                ));
            }
        }
    }
    Ok(vec![write_output(ctx.out_dir, DATA_FILE, &csv)?])
}
