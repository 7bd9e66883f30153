use thiserror::Error;

use crate::decompose::FailureReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("projective point has all coordinates zero")]
    ZeroPoint,
    #[error("form has no nonzero coefficient")]
    ZeroForm,
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("exponent vector {alpha:?} does not have {nvars} entries summing to {degree}")]
    InvalidExponent { alpha: Vec<u32>, nvars: usize, degree: usize },
    #[error("degree parameter {k} out of range {lo}..={hi}")]
    DegreeOutOfRange { k: usize, lo: usize, hi: usize },
    #[error("invalid label ({0}, {1})")]
    InvalidLabel(usize, usize),
    #[error("non-real root has no conjugate partner (nearest candidate at distance {distance:e})")]
    PairingFailure { distance: f64 },
    #[error("point set is not invariant under conjugation")]
    NotSigmaInvariant,
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("target is not in the real span (relative residual {residual:e})")]
    NotInSpan { residual: f64 },
    #[error("parameter vector has length {found}, template needs {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
    #[error("no square-free apolar generator found up to degree {max_degree}")]
    RankSearchExhausted { max_degree: usize },
    #[error("no transversal line found after {retries} retries")]
    RetriesExhausted { retries: usize },
    #[error("decomposition failed (best relative residual {:e})", .0.best_residual)]
    Decomposition(Box<FailureReport>),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}
