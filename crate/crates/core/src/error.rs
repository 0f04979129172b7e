use thiserror::Error;

/// Errors raised by the analysis primitives.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller violated a precondition (bad sizes, out-of-range parameters).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input is structurally valid but carries no usable signal
    /// (all points identical, zero variance, every cluster trimmed).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A numerical routine broke down (singular matrix, non-finite likelihood).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }
}
