use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid argument: out-of-range index, overlapping wires, non-unitary
    /// matrix, inconsistent sizes and similar caller mistakes.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested symmetry sector has zero weight in the input state, so
    /// there is nothing to project onto.
    #[error("good component absent: {0}")]
    EmptySector(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The request would exceed the dense-simulation budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn empty(msg: impl Into<String>) -> Self {
        Error::EmptySector(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
