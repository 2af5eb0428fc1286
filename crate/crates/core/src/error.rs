use thiserror::Error;

/// Errors raised by problem evaluation, indicator computation and the optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computation produced NaN or an infinity. `point` holds the offending coordinates.
    #[error("numeric failure: {message} (at {point:?})")]
    Numeric { message: String, point: Vec<f64> },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Weak-domination perturbation could not separate coinciding objective vectors.
    #[error("degenerate configuration: points {indices:?} could not be separated")]
    Degenerate { indices: Vec<usize> },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numeric(message: impl Into<String>, point: &[f64]) -> Self {
        Error::Numeric {
            message: message.into(),
            point: point.to_vec(),
        }
    }
}
