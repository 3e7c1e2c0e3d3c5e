use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fields live on different grids: {0}")]
    GridMismatch(String),

    #[error("singular matrix while factorizing mode l={mode} (epsilon={epsilon}, dt={dt})")]
    Singular { epsilon: f64, dt: f64, mode: i64 },

    #[error("solution diverged (non-finite values) at step {step}")]
    Divergence { step: usize },

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidConfig(msg.into()))
}
