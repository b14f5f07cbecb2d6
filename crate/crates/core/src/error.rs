//! Error type shared across the library.
//!
//! Most errors signal a violated operation precondition rather than an
//! internal failure; several of them mark the exact boundary of a theorem
//! hypothesis (e.g. [`AlgebraError::NormTooLarge`], [`AlgebraError::NoLambda`],
//! [`AlgebraError::InfeasibleCase`]) and are exercised deliberately by tests.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AlgebraError {
    #[error("cannot invert zero")]
    ZeroInverse,
    #[error("operands belong to different scalar domains or an unsupported domain: {0}")]
    DomainMismatch(String),
    #[error("quaternion norm {norm} exceeds 2: no difference of two unit-norm quaternions exists")]
    NormTooLarge { norm: f64 },
    #[error("quaternion is not of unit norm (N = {norm})")]
    NotUnitNorm { norm: f64 },
    #[error("quaternion has a nonzero real part")]
    NotPure,
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("no nonzero zero-sum tuple exists: two-element field with odd length")]
    InfeasibleCase,
    #[error("domain has infinitely many elements")]
    InfiniteDomain,
    #[error("matrix shapes are incompatible: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is central; operation requires a noncentral input")]
    CentralInput,
    #[error("polynomial hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("two diagonal entries are conjugate; diagonalization hypothesis fails")]
    ConjugateDiagonal,
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("matrix is nilpotent; use the nilpotent canonical form instead")]
    Nilpotent,
    #[error("matrix is invertible; no Fitting split exists")]
    Invertible,
    #[error("matrix does not square to -I")]
    NotSkewInvolution,
    #[error("field contains no square root of -1")]
    NoScalarSkewInvolution,
    #[error("matrix has nonzero trace")]
    NonzeroTrace,
    #[error("matrix is not triangular")]
    NotTriangular,
    #[error("polynomial is not multilinear")]
    NotMultilinear,
    #[error("syntax error at byte {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown variable at byte {offset}")]
    UnknownVariable { offset: usize },
    #[error("polynomial uses {needed} variables but {given} arguments were supplied")]
    ArityMismatch { needed: usize, given: usize },
    #[error("no regularizing scalar exists: all {0} shifts are singular")]
    NoLambda(usize),
    #[error("field has fewer than {needed} elements")]
    FieldTooSmall { needed: usize },
    #[error("degenerate M2(GF(2)) case: the diagonal-scaling family has no nonzero solution")]
    Degenerate2x2GF2,
    #[error("retries exhausted after {attempts} attempts: {context}")]
    RetryExhausted { attempts: usize, context: String },
    #[error("matrix is not in the special linear group (dieudonne value {value})")]
    NotSL { value: f64 },
    #[error("replay residual {residual} exceeds tolerance {tolerance}")]
    NormResidual { residual: f64, tolerance: f64 },
    #[error("polynomial outside the supported witness family: {0}")]
    UnsupportedPolynomial(String),
    #[error("enumeration budget exceeded: needs {needed} tuples, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("invalid certificate: {0}")]
    BadCertificate(String),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;
