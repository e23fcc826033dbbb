//! Shared error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("coding-mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("divergence at step {step}: {detail}")]
    Divergence { step: usize, detail: String },

    #[error("training failed at epoch {epoch}: {detail}")]
    Training { epoch: usize, detail: String },

    #[error("nothing to read at the given address: no hard location activated")]
    EmptyActivation,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simulation unstable: {0}")]
    Instability(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
