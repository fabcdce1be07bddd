use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPd { min_eig: f64 },

    #[error("linear operator is numerically singular (condition estimate {condition:e})")]
    SingularOperator { condition: f64 },

    #[error("resolvent is singular at {point}")]
    Pole { point: Complex64 },

    #[error("R0 block is singular (smallest |eigenvalue| {min_abs_eig:e})")]
    R0Singular { min_abs_eig: f64 },

    #[error("point is not strictly feasible (smallest eigenvalue of W {lambda_min:e})")]
    Boundary { lambda_min: f64 },

    #[error("eigenvalue within {distance:e} of the stability boundary")]
    BoundarySpectrum { distance: f64 },

    #[error("invariant subspace basis is ill-conditioned (reciprocal condition {rcond:e})")]
    Subspace { rcond: f64 },

    #[error("model is not strictly passive: {0}")]
    NotStrictlyPassive(String),

    #[error("shift xi = {xi} is not admissible")]
    XiTooLarge { xi: f64 },

    #[error("degenerate search direction")]
    DegenerateDirection,

    #[error("Newton operator is numerically singular (condition estimate {condition:e})")]
    SingularHessian { condition: f64 },

    #[error("bilinear transform has a pole: I - A is singular")]
    TransformPole,

    #[error("invalid scalar model: {0}")]
    InvalidScalarModel(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Schur iteration did not converge")]
    NoConvergence,

    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
