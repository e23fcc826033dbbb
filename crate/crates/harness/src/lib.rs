//! Experiment orchestration for the engram laboratory: named experiments,
//! strict configuration loading, seeded trial fan-out, result manifests,
//! and plot-data emission.

pub mod config;
pub mod datasets;
pub mod error;
pub mod experiments;
pub mod index_check;
pub mod manifest;
pub mod plots;
pub mod runner;

/// Stamped into every manifest; bump when output formats change.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable overriding the trial worker count.
pub const WORKERS_ENV: &str = "ENGRAM_LAB_WORKERS";
