use thiserror::Error;

#[derive(Debug, Error)]
pub enum KsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid multiplier: {0}")]
    InvalidMultiplier(String),

    #[error("invalid time: {0}")]
    InvalidTime(String),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at node {node} (t = {time}): {what}")]
    NonFinite {
        node: usize,
        time: f64,
        what: String,
    },

    #[error("step rejected at t = {time}: {reason}")]
    StepRejected { time: f64, reason: String },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KsError>;
