//! Completeness check for the operation index in `docs/equation_index.tsv`:
//! a machine-readable table tying each core mathematical definition to the
//! operation implementing it. The check enforces a bijection between the
//! registry below and the table, so documentation cannot silently drift.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{HarnessError, Result};

/// One required index row: stable anchor plus the implementing operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegistryEntry {
    pub anchor: &'static str,
    pub module: &'static str,
    pub operation: &'static str,
}

/// Every documented mathematical definition that must appear in the index,
/// exactly once each.
pub const REGISTRY: &[RegistryEntry] = &[
    RegistryEntry { anchor: "plasticity-hebbian-rate-rule", module: "plasticity", operation: "hebbian_derivative" },
    RegistryEntry { anchor: "plasticity-scaled-rule", module: "plasticity", operation: "spass_derivative" },
    RegistryEntry { anchor: "plasticity-scaled-rule-ratio-form", module: "plasticity", operation: "spass_derivative_kappa_form" },
    RegistryEntry { anchor: "plasticity-weight-fixed-point", module: "plasticity", operation: "spass_fixed_point_weight" },
    RegistryEntry { anchor: "plasticity-activity-fixed-point", module: "plasticity", operation: "spass_fixed_point_activity" },
    RegistryEntry { anchor: "assoc-outer-product-storage", module: "assoc_memory", operation: "store_patterns" },
    RegistryEntry { anchor: "assoc-consolidation-pruning", module: "assoc_memory", operation: "consolidate_prune" },
    RegistryEntry { anchor: "regularized-objective", module: "regularizers", operation: "regularized_total" },
    RegistryEntry { anchor: "l0-count-penalty", module: "regularizers", operation: "l0_norm" },
    RegistryEntry { anchor: "relaxed-l0-penalty", module: "regularizers", operation: "l0_relaxed_loss" },
    RegistryEntry { anchor: "gate-open-probability", module: "regularizers", operation: "open_probability" },
    RegistryEntry { anchor: "l1-penalty", module: "regularizers", operation: "l1_penalty" },
    RegistryEntry { anchor: "sparse-autoencoder-objective", module: "regularizers", operation: "objective" },
    RegistryEntry { anchor: "bernoulli-divergence-penalty", module: "regularizers", operation: "kl_bernoulli" },
    RegistryEntry { anchor: "stochastic-gate-probability", module: "engram_gate", operation: "gate_probabilities" },
    RegistryEntry { anchor: "sdm-write-read-protocol", module: "sdm", operation: "write/read" },
    RegistryEntry { anchor: "stdp-pair-kernel", module: "stdp_snn", operation: "stdp_delta" },
];

#[derive(Debug, Default)]
pub struct CompletenessReport {
    /// Registry entries with no index row, named by operation.
    pub missing: Vec<String>,
    /// Index anchors not present in the registry.
    pub unexpected: Vec<String>,
    /// Anchors appearing more than once.
    pub duplicated: Vec<String>,
    /// Anchors whose module/operation columns disagree with the registry.
    pub mismatched: Vec<String>,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
            && self.unexpected.is_empty()
            && self.duplicated.is_empty()
            && self.mismatched.is_empty()
    }

    pub fn describe(&self) -> String {
        if self.is_complete() {
            return "index complete".to_string();
        }
        let mut s = String::new();
        for m in &self.missing {
            let _ = writeln!(s, "missing entry: {m}");
        }
        for u in &self.unexpected {
            let _ = writeln!(s, "unregistered anchor: {u}");
        }
        for d in &self.duplicated {
            let _ = writeln!(s, "duplicated anchor: {d}");
        }
        for m in &self.mismatched {
            let _ = writeln!(s, "module/operation mismatch: {m}");
        }
        s
    }
}

/// Expected header of the index file.
pub const HEADER: &str = "anchor\tstatement\tmodule\toperation\tdeviation";

/// Parse the tab-separated index and compare against the registry.
pub fn check_index_completeness(path: &Path) -> Result<CompletenessReport> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read index {}: {e}", path.display()),
        ))
    })?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        other => {
            return Err(HarnessError::Runtime(format!(
                "bad index header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut rows: Vec<(String, String, String)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(HarnessError::Runtime(format!(
                "index line {}: expected 5 tab-separated columns, got {}",
                lineno + 2,
                cols.len()
            )));
        }
        rows.push((cols[0].to_string(), cols[2].to_string(), cols[3].to_string()));
    }

    let mut report = CompletenessReport::default();
    for entry in REGISTRY {
        let matches: Vec<_> = rows.iter().filter(|r| r.0 == entry.anchor).collect();
        match matches.len() {
            0 => report
                .missing
                .push(format!("{} ({}::{})", entry.anchor, entry.module, entry.operation)),
            1 => {
                let r = matches[0];
                if r.1 != entry.module || r.2 != entry.operation {
                    report.mismatched.push(format!(
                        "{}: index says {}::{}, registry says {}::{}",
                        entry.anchor, r.1, r.2, entry.module, entry.operation
                    ));
                }
            }
            _ => report.duplicated.push(entry.anchor.to_string()),
        }
    }
    for r in &rows {
        if !REGISTRY.iter().any(|e| e.anchor == r.0) {
            report.unexpected.push(format!("{} ({}::{})", r.0, r.1, r.2));
        }
    }
    Ok(report)
}
