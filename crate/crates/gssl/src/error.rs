//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset handling, graph construction and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a precondition (bad shape, empty set, out-of-range
    /// parameter, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A data file could not be parsed. The message names the offending line.
    #[error("{message} at line {line}")]
    Parse { line: usize, message: String },

    /// A linear system was singular or too ill-conditioned to solve.
    #[error("singular linear system (condition estimate {condition_estimate:.3e})")]
    SingularSystem { condition_estimate: f64 },

    /// An operation that requires unlabelled inputs was run on a dataset
    /// without any.
    #[error("no unlabelled inputs remain")]
    NoUnlabelledInputs,
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
