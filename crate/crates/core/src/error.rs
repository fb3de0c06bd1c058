use thiserror::Error;

/// Errors raised by the density calculus, samplers and file readers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or inconsistent input (bad file, out-of-range id, mismatched shapes).
    #[error("input error: {0}")]
    Input(String),
    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The request exceeds a configured size or work cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// An internal identity that must hold exactly was found to fail.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn capacity<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capacity(msg.into()))
}
