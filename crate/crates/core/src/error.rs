use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds {tol:.3e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("matrix is not positive semidefinite (lambda_min {lambda_min:.3e} below -{tol:.3e})")]
    NotPsd { lambda_min: f64, tol: f64 },

    #[error("node {t} lies outside the support {support}")]
    OutOfSupport { t: f64, support: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("kernel value at node {t} is not finite")]
    NonFiniteKernel { t: f64 },

    #[error("affine map t -> a*t + b is degenerate (a = 0)")]
    DegenerateMap,

    #[error("density at t = {t} is not positive semidefinite (lambda_min {lambda_min:.3e})")]
    NonPsdDensity { t: f64, lambda_min: f64 },

    #[error("z = {re} + {im}i is within {tol:.3e} of the excluded set")]
    PoleProximity { re: f64, im: f64, tol: f64 },

    #[error("illegal conversion: {0}")]
    IllegalConversion(String),

    #[error("no conversion path from {from} to {to}")]
    UnsupportedPath { from: String, to: String },

    #[error("{t0} is not an atom of the measure")]
    NotAnAtom { t0: f64 },

    #[error(
        "Richardson ladder did not converge after {depth} steps \
         (last increment {increment:.3e}, last estimate norm {last_norm:.3e})"
    )]
    NoConvergence {
        depth: usize,
        increment: f64,
        last_norm: f64,
        last: Vec<Vec<[f64; 2]>>,
        previous: Vec<Vec<[f64; 2]>>,
    },

    #[error("extracted parameters contradict the claimed class: {0}")]
    ClassMismatch(String),

    #[error("evaluation failed at z = {re} + {im}i: {reason}")]
    EvaluationFailed { re: f64, im: f64, reason: String },

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("numerical rank differs across samples: {ranks:?}")]
    RankInstability { ranks: Vec<usize> },

    #[error("equivalent conditions disagree: {0}")]
    InconsistentEquivalence(String),

    #[error("shifted constant term is not positive semidefinite (lambda_min {lambda_min:.3e})")]
    ShiftNotPsd { lambda_min: f64 },

    #[error("operation does not support representation kind {0}")]
    UnsupportedKind(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
