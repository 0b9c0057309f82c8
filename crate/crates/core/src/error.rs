use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Kraus list is empty")]
    EmptyKrausList,
    #[error("Kraus operator {index} has shape {found:?}, expected {expected:?}")]
    ShapeMismatch {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("map is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },
    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("matrix has non-positive trace {trace:.3e}")]
    NonPositiveTrace { trace: f64 },
    #[error("state is not normalised (norm {norm:.15})")]
    NotNormalized { norm: f64 },
    #[error("matrix is zero and has no support")]
    ZeroMatrix,
    #[error("expected a bipartite system, got {parts} subsystem(s)")]
    NotBipartite { parts: usize },
    #[error("invalid permutation {perm:?} for {parts} subsystems")]
    InvalidPermutation { perm: Vec<usize>, parts: usize },
    #[error("Schmidt number {r} must lie in 1..={max}")]
    InvalidSchmidtNumber { r: usize, max: usize },
    #[error("basis vectors are not orthonormal (Gram defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },
    #[error("state is not orthogonal to S1 ⊗ S2 (projection norm {residual:.3e})")]
    NotInComplement { residual: f64 },
    #[error("first complement has dimension {dim}, at most 1 is supported")]
    ComplementTooLarge { dim: usize },
    #[error("index ({s}, {t}) out of range for block size {n}")]
    IndexOutOfRange { s: usize, t: usize, n: usize },
    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("joint input dimension {ambient} exceeds cap {cap}")]
    AmbientTooLarge { ambient: usize, cap: usize },
    #[error("channel list is empty")]
    NoChannels,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
