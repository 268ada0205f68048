use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("solver did not converge after {iterations} iterations (last residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("state cannot be projected onto the constraint set: {reason}")]
    NotProjectable { reason: String, residuals: Vec<f64> },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no feasible starting point: {0}")]
    InfeasibleStart(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
