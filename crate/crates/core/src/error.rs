//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad ranks, fractions, spec parameters, flags).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Matrix or factor shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument is outside the operation's domain (bad index, i == j, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A factorization or inversion failed, or a quantity degenerated.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Input data is malformed or unusable.
    #[error("data error: {0}")]
    Data(String),

    /// The request exceeds what exhaustive enumeration can handle.
    #[error("exceeds capability: {0}")]
    Capability(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
