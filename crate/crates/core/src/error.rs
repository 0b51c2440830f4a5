use thiserror::Error;

/// Numerical and domain failures raised by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atomic response has a degenerate pole at omega = {omega}")]
    DegeneratePole { omega: f64 },

    #[error("dispersion relation is singular at a dressed-state pole (omega = {omega})")]
    PoleAtDressedState { omega: f64 },

    #[error("quadrature did not converge after {evaluations} evaluations (estimate {estimate}, error {error})")]
    QuadratureFailure {
        evaluations: usize,
        estimate: f64,
        error: f64,
    },

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("singular transfer-matrix element: {0}")]
    SingularElement(String),

    #[error("jump-condition system is numerically singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("localization fit has non-negative slope {slope}; transmission does not decay")]
    DegenerateFit { slope: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
