//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, simulation, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// Two objects that must share a system size do not.
    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    /// A gate touched a hidden site or a hide/unhide was unbalanced.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// An iterative numerical routine failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Operation requested at a system size its implementation does not support.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// A physical precondition (e.g. fixed-charge support) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Least-squares fit could not be performed.
    #[error("fit error: {0}")]
    Fit(String),

    /// Run configuration is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
