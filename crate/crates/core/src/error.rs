use alloc::string::String;

/// Errors raised by kernels, geometry queries and estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A kernel was evaluated at its singularity (coincident points).
    #[error("singular evaluation: {0}")]
    Singularity(&'static str),
    /// An argument lies outside the operation's domain of definition.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested (dimension, index) pair is not supported by the formula.
    #[error("unsupported configuration: {0}")]
    Capability(String),
    /// A point that must lie in the open set does not.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Rejection sampling could not find the region.
    #[error("region appears empty: {accepted} of {tried} proposals accepted")]
    EmptyRegion { tried: u64, accepted: u64 },
    /// Too many walks hit the step budget.
    #[error("{capped} of {total} walks exceeded the step budget (allowed fraction {allowed})")]
    Reliability { capped: u64, total: u64, allowed: f64 },
    /// A denominator estimate is statistically indistinguishable from zero.
    #[error("precision error: {0}")]
    Precision(String),
    /// A quadrature or series failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
