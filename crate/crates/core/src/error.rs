use thiserror::Error;

use crate::recon::Solve;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("operator is indefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    IndefiniteOperator { min_eigenvalue: f64 },

    #[error("range of K is not reachable by the synthesis operator (residual {residual:.3e})")]
    RangeDeficiency {
        residual: f64,
        witness: crate::Vector,
    },

    #[error("family is not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("precondition failed: {reason}")]
    PreconditionFailed {
        reason: String,
        witness: Option<crate::Vector>,
    },

    #[error("controller does not commute with K (relative defect {defect:.3e})")]
    CommutationFailure { defect: f64 },

    #[error("controlled form is not real (imaginary part {imaginary:.3e})")]
    NonRealForm { imaginary: f64 },

    #[error("operator order is only defined for Hermitian operands (deviation {deviation:.3e})")]
    NonHermitianComparison { deviation: f64 },

    #[error("solver did not converge in {} iterations", .0.trace.iterations)]
    NotConverged(Box<Solve>),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}
