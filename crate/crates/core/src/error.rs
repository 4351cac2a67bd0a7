use thiserror::Error;

/// Errors raised by evaluators, integrators and the finite-difference solver.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error(
        "quadrature did not converge: value {value:e}, error estimate {estimate:e} \
         exceeds requested {requested:e} after {subdivisions} subdivisions"
    )]
    NonConvergence { value: f64, estimate: f64, requested: f64, subdivisions: usize },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("solver aborted: {0}")]
    Unstable(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
pub(crate) use domain;
