use thiserror::Error;

/// Failures shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the range where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A request that can never succeed, e.g. a zero Monte Carlo budget.
    #[error("usage error: {0}")]
    Usage(String),
    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {err_bound:e}")]
    Convergence { estimate: f64, err_bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
