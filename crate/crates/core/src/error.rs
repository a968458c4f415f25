use thiserror::Error;

use crate::restart::SolverTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A non-finite iterate appeared. Carries the trace recorded so far.
    #[error("numerical divergence at iteration {iteration}")]
    Divergence {
        iteration: usize,
        trace: Box<SolverTrace>,
    },

    #[error("backtracking line search did not terminate after {steps} increases (ell = {ell:e})")]
    Backtracking { steps: usize, ell: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("zero matrix: no singular value above the rank cutoff")]
    ZeroMatrix,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
