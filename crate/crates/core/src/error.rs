use thiserror::Error;

/// Errors raised by the disk geometry routines.
///
/// Every variant is a hard failure: nothing downstream coerces an input
/// that misses its precondition into one that meets it.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (‖A − A*‖ = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("eigenvalue {eigenvalue} lies outside the domain of the function")]
    DomainError { eigenvalue: f64 },

    #[error("matrix is singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("block matrix is not θ-unitary (‖g*ρg − ρ‖ = {residual:e})")]
    NotThetaUnitary { residual: f64 },

    #[error("Borel parameter g is singular")]
    SingularG,

    #[error("anti-Hermitian parameter has ‖x + x*‖ = {residual:e}")]
    NotAntiHermitian { residual: f64 },

    #[error("block matrix has no Borel factorization (reconstruction residual {residual:e})")]
    NotBorel { residual: f64 },

    #[error("point is not in the open unit disk (‖z‖ = {norm})")]
    NotInDisk { norm: f64 },

    #[error("point is not on the boundary of the disk (‖a‖ = {norm})")]
    NotBoundary { norm: f64 },

    #[error("Möbius denominator g11 + g12·z is singular")]
    SingularDenominator,

    #[error("points coincide")]
    CoincidentPoints,

    #[error("first component of the generator is singular")]
    SingularFirstComponent,

    #[error("vector is not θ-orthogonal to the line (residual {residual:e})")]
    NotTangent { residual: f64 },

    #[error("generator is not in the hyperbolic part (θ(x,x) not positive invertible)")]
    NotHyperbolic,

    #[error("vector is zero")]
    ZeroVector,

    #[error("parallel projection system has no unique solution: {reason}")]
    NoSolution { reason: String },

    #[error("endomorphism is based at a different line")]
    BaseMismatch,

    #[error("matrix is not diagonal (off-diagonal mass {residual:e})")]
    NotDiagonal { residual: f64 },

    #[error("matrix does not respect the block pattern {blocks:?}")]
    BlockPatternViolation { blocks: Vec<usize> },

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
