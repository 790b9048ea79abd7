//! Error type shared by every module.

use crate::codes::RealizabilityReport;

/// Failure categories. The CLI maps `Usage`/`Realizability`/`Domain` to exit
/// code 2 and `Resource` to exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input.
    #[error("invalid input: {0}")]
    Usage(String),
    /// The request exceeds a hard size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A q vector cannot be realized with the requested blocklength.
    #[error("q vector is not realizable at n = {}: offending indices {:?}", .0.n, .0.offending)]
    Realizability(RealizabilityReport),
    /// The operation is undefined at this point of its domain.
    #[error("outside the domain of the operation: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn resource<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Resource(msg.into()))
}

/// Rejects `κ = 0` as bad input and `κ > cap` as a resource limit.
pub(crate) fn check_kappa_cap(kappa: usize, cap: usize, what: &str) -> Result<()> {
    if kappa == 0 {
        return usage(format!("{what} needs kappa >= 1"));
    }
    if kappa > cap {
        return resource(format!("{what} supports kappa <= {cap}, got {kappa}"));
    }
    Ok(())
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
