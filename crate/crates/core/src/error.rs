use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation
    /// (fixed points, unattainable energies, excluded lattice points).
    #[error("domain error: {0}")]
    Domain(String),
    /// Intermediate value left the representable range.
    #[error("range error: {0}")]
    Range(String),
    /// An iterative method failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Requested problem size exceeds the configured limits.
    #[error("resource error: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
