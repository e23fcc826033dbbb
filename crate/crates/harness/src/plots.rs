//! Plot-data emission: reshape a run's data files into long-format
//! `(x, y, series)` CSV that any external plotter can consume. No
//! plotting library is embedded.

use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::manifest::{load, LoadedManifest};

pub const PLOT_FILE: &str = "plot_data.csv";

fn read_rows(dir: &Path, name: &str) -> Result<Vec<Vec<String>>> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| {
        HarnessError::Io(std::io::Error::new(
            e.kind(),
            format!("missing output {}: {e}", path.display()),
        ))
    })?;
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect())
}

fn find_output<'a>(m: &'a LoadedManifest, suffix: &str) -> Result<&'a str> {
    m.outputs
        .iter()
        .find(|o| o.ends_with(suffix))
        .map(|s| s.as_str())
        .ok_or_else(|| {
            HarnessError::Runtime(format!(
                "manifest for '{}' lists no {suffix} output",
                m.experiment
            ))
        })
}

/// Emit `plot_data.csv` next to the manifest; returns the file path.
pub fn emit_plot_data(manifest_path: &Path) -> Result<PathBuf> {
    let dir = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let m = load(manifest_path)?;
    let mut out = String::from("x,y,series\n");
    let mut push = |x: &str, y: &str, series: &str| {
        out.push_str(&format!("{x},{y},{series}\n"));
    };
    match m.experiment.as_str() {
        "spass-convergence" => {
            // u,v_target,kappa,w_final,w_star,rel_err
            for r in read_rows(&dir, find_output(&m, "spass_convergence.csv")?)? {
                push(&r[2], &r[5], &format!("u={} vt={}", r[0], r[1]));
            }
        }
        "hopfield-capacity" => {
            // n,coding,coding_level,m_max
            for r in read_rows(&dir, find_output(&m, "capacity.csv")?)? {
                push(&r[0], &r[3], &r[1]);
            }
        }
        "sdm-recall" => {
            // trial_seed,pattern_index,bits_flipped,iterations,converged,exact
            for (i, r) in read_rows(&dir, find_output(&m, "sdm_recall.csv")?)?
                .iter()
                .enumerate()
            {
                let series = if r[5] == "1" { "exact" } else { "inexact" };
                push(&i.to_string(), &r[3], series);
            }
        }
        "sparsity-sweep" => {
            // beta,recon_loss,baseline_loss,mean_activation,active_units,capacity_proxy
            for r in read_rows(&dir, find_output(&m, "sparsity_sweep.csv")?)? {
                push(&r[0], &r[5], "capacity_proxy");
                push(&r[0], &r[3], "mean_activation");
            }
        }
        "gating-continual" => {
            // after_task,eval_task,accuracy,seed,gated_flag
            for r in read_rows(&dir, find_output(&m, "gating_continual.csv")?)? {
                let variant = if r[4] == "1" { "gated" } else { "control" };
                push(&r[0], &r[2], &format!("eval{}-{}-seed{}", r[1], variant, r[3]));
            }
        }
        "stdp-assembly" => {
            // seed,variant,time_ms,modularity
            for r in read_rows(&dir, find_output(&m, "assembly_modularity_series.csv")?)? {
                push(&r[2], &r[3], &format!("{}-{}", r[1], r[0]));
            }
        }
        "engram-lifecycle" => {
            // cue_fraction,phase,success_rate,trials
            for r in read_rows(&dir, find_output(&m, "lifecycle.csv")?)? {
                push(&r[0], &r[2], &r[1]);
            }
        }
        other => {
            return Err(HarnessError::Runtime(format!(
                "no plot transform for experiment '{other}'"
            )))
        }
    }
    let path = dir.join(PLOT_FILE);
    std::fs::write(&path, out)?;
    Ok(path)
}
