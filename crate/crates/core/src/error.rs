use thiserror::Error;

/// Errors raised by the computational core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sieve too small: need {needed}, have {have}")]
    SieveTooSmall { needed: u64, have: u64 },

    #[error("accuracy not met: {0}")]
    Accuracy(String),

    #[error("budget exceeded: x = {x} is above the cap {cap} (estimated {estimated_ops:.3e} character evaluations)")]
    Budget {
        x: u64,
        cap: u64,
        estimated_ops: f64,
    },

    #[error("empty family: {0}")]
    EmptyFamily(String),

    #[error("dataset format: {0}")]
    Format(String),

    #[error("config mismatch: {0}")]
    ConfigMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
