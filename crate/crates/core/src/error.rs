use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument was out of its domain (negative loss, NaN gradient, empty dataset...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two values that must agree structurally did not (layouts, matrix shapes).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A binary or text file did not follow its declared format.
    #[error("format error in {field}: {detail}")]
    Format { field: &'static str, detail: String },

    /// A training run or descent produced a non-finite value.
    #[error("diverged at step {step}: {detail}")]
    Diverged { step: usize, detail: String },

    /// A convergence rate was requested for a trajectory that cannot define one.
    #[error("rate undefined: {0}")]
    UndefinedRate(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn format(field: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            field,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
