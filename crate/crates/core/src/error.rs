use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The matrix is not reachable by the cylindric chart.
    #[error("element outside the cylindric chart: {0}")]
    NonCylindric(String),

    /// An operator with a 1/tanh r or 1/sinh 2r coefficient was evaluated too close to r = 0.
    #[error("operator is singular on the axis (r = {r:e} below cutoff {cutoff:e})")]
    SingularAtAxis { r: f64, cutoff: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: error {error:e} above tolerance {tolerance:e}")]
    QuadratureNoConvergence { error: f64, tolerance: f64 },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("extrapolation unstable: {0}")]
    ExtrapolationUnstable(String),

    #[error("analytic continuation ambiguous at u = {0}")]
    ContinuationAmbiguous(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
