use thiserror::Error;

/// Harness failures, partitioned by process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// Exit code 2: bad invocation (unknown experiment, malformed CLI use).
    #[error("usage error: {0}")]
    Usage(String),
    /// Exit code 3: configuration rejected, with the offending field path
    /// where the parser provides one.
    #[error("config error: {0}")]
    Config(String),
    /// Exit code 4: failure while executing a valid experiment.
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Config(_) => 3,
            HarnessError::Runtime(_) | HarnessError::Io(_) => 4,
        }
    }
}

impl From<engram_core::error::CoreError> for HarnessError {
    fn from(e: engram_core::error::CoreError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
