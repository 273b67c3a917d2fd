use thiserror::Error;

/// Errors raised by the projection, Douglas and operator-range routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("subspace is not contained in the minuend")]
    NotContained,
    #[error("range inclusion fails, AX = B has no solution (residual {0:e})")]
    NoSolution(f64),
    #[error("pair (A, S) is not compatible")]
    Incompatible,
    #[error("operator is singular (rank {rank} < {dim})")]
    Singular { rank: usize, dim: usize },
    #[error("projection range does not match the target subspace")]
    RangeMismatch,
    #[error("matrix is not idempotent (defect {0:e})")]
    NotIdempotent(f64),
    #[error("vector is not in the range of the weight (residual {0:e})")]
    NotInRange(f64),
    #[error("range vectors belong to different weights")]
    WeightMismatch,
    #[error("operator does not leave the nullspace of the weight invariant (residual {0:e})")]
    NotExtendable(f64),
    #[error("algebraic and containment forms of the A-Hermitian test disagree")]
    KreinDisagreement,
    #[error("equivalent forms of an identity disagree: {0}")]
    IdentityDisagreement(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
