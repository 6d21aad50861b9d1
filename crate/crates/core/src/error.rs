use thiserror::Error;

use crate::optim::TrainLog;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("pole encountered: {0}")]
    PoleEncountered(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("regularized system is numerically singular")]
    SingularSystem,

    #[error("degenerate range: min == max == {0}")]
    DegenerateRange(f64),

    #[error("multiplicative decomposition needs positive data, got {value} at index {index}")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged {
        epoch: usize,
        reason: String,
        log: Box<TrainLog>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for numerical failures (poles, overflow, divergence) as opposed to
    /// bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DivisionByZero
                | Error::PoleEncountered(_)
                | Error::NonFinite(_)
                | Error::SingularSystem
                | Error::Diverged { .. }
        )
    }
}
