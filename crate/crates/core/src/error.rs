use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed config (line {line}): {message}")]
    MalformedConfig { line: usize, message: String },

    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },

    #[error("fields sampled on different grids")]
    GridMismatch,

    #[error("Hermite degree {degree} exceeds evaluator maximum {max}")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("displacement ({0}, {1}) is not a multiple of the grid spacing")]
    OffGridDisplacement(f64, f64),

    #[error("grid too coarse: {points_per_length:.2} points per magnetic length (need at least 8)")]
    GridTooCoarse { points_per_length: f64 },

    #[error("orbitals not orthonormal: worst pair ({row}, {col}) deviates by {deviation:e}")]
    OrthonormalityFailure { row: usize, col: usize, deviation: f64 },

    #[error("determinant space of size {size} exceeds cap {cap}")]
    TooLarge { size: u128, cap: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symmetry violation: deviation {0:e}")]
    SymmetryViolation(f64),

    #[error("Krylov propagation failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("orbitals not orthonormal (Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("integration unstable at t = {time}: orthonormality drift {drift:e} in one step")]
    StepUnstable { time: f64, drift: f64 },

    #[error("non-finite value encountered at t = {0}")]
    NonFiniteValue(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("defect leaks into the {sector}-replacement sector: {weight:e}")]
    SupportViolation { sector: usize, weight: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("I/O failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
