//! Deterministic computational models of memory-trace ("engram") formation.
//!
//! The crate is organized around independent mechanisms that can be studied
//! in isolation or composed by an experiment harness:
//!
//! - [`plasticity`] — Hebbian and homeostatically scaled synaptic dynamics
//!   with closed-form fixed points and an ODE integrator.
//! - [`assoc_memory`] — sparse Hopfield-style associative memory with
//!   thresholded recall, consolidation pruning, and capacity measurement.
//! - [`sdm`] — Kanerva-style sparse distributed memory (hard locations,
//!   counter writes, sum-and-threshold reads) plus a Top-K/L2 layer.
//! - [`regularizers`] — L0/L1/KL sparsity penalties with analytic gradients
//!   and a minimal sparse autoencoder trainer.
//! - [`engram_gate`] — Bernoulli-gated binarized networks for continual
//!   learning.
//! - [`stdp_snn`] — leaky integrate-and-fire network with excitatory and
//!   inhibitory spike-timing-dependent plasticity.
//!
//! All randomness flows through [`rng::SeedStream`]; identical seeds
//! reproduce identical results bit-for-bit.

pub mod assoc_memory;
pub mod engram_gate;
pub mod error;
pub mod num;
pub mod pattern;
pub mod plasticity;
pub mod regularizers;
pub mod rng;
pub mod sdm;
pub mod stdp_snn;
pub mod weights;

pub use error::CoreError;
pub use num::Real;
pub use pattern::{Coding, Pattern, PatternSet};
pub use rng::SeedStream;
pub use weights::WeightMatrix;

/// Default scalar for experiments and aliases below.
pub type Scalar = f64;

/// Concrete aliases for the scalar-generic types, at the default precision.
pub type PlasticityParams = plasticity::PlasticityParams<Scalar>;
pub type SynapseState = plasticity::SynapseState<Scalar>;
pub type Trajectory = plasticity::Trajectory<Scalar>;
pub type AssocMemory = assoc_memory::AssocMemory<Scalar>;
pub type GateDistribution = regularizers::GateDistribution<Scalar>;
pub type SparseAutoencoder = regularizers::SparseAutoencoder<Scalar>;
