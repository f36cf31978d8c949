use thiserror::Error;

/// Library error type. Numeric payloads are stored as `f64` regardless of the
/// scalar type the computation ran in.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("branch {branch}: bisection interval still {width:e} wide (> {tol:e}) after {iterations} iterations")]
    ConvergenceFailure {
        branch: usize,
        width: f64,
        tol: f64,
        iterations: usize,
    },

    #[error("quadrature error estimate {error:e} exceeds tolerance {tol:e} after {intervals} subdivisions")]
    QuadratureFailure {
        error: f64,
        tol: f64,
        intervals: usize,
    },

    #[error("repeated cubic roots: |Xi| = {xi_modulus:e} below {threshold:e}")]
    DegenerateRoots { xi_modulus: f64, threshold: f64 },

    #[error("transfer denominator modulus {modulus:e} below {threshold:e}")]
    DegenerateDenominator { modulus: f64, threshold: f64 },

    #[error("singular banded matrix")]
    SingularMatrix,

    #[error("implicit step {step}: singular banded system")]
    SingularStep { step: usize },

    #[error("instability detected at step {step}: sup-norm grew {factor:e}x the data scale")]
    Instability { step: usize, factor: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
