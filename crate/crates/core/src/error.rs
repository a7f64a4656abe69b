use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("algebra mismatch: {0:?} vs {1:?}")]
    AlgebraMismatch(Vec<usize>, Vec<usize>),

    #[error("block shape mismatch: expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("not Hermitian (anti-Hermitian part {0:e})")]
    NotHermitian(f64),

    #[error("not a state: {0}")]
    NotAState(String),

    #[error("matrix function outside its domain: {0}")]
    Domain(String),

    #[error("singular state where an invertible one is required (min eigenvalue {0:e})")]
    Singular(f64),

    #[error("projector must be non-zero")]
    ZeroProjector,

    #[error("exposed-face criteria disagree (inner-product gap {value_gap:e}, off-face weight {off_face:e})")]
    DegenerateFace { value_gap: f64, off_face: f64 },

    #[error("rank-deficient generators (residual norm {0:e})")]
    RankDeficient(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector not in the required subspace (residual {0:e})")]
    NotInSubspace(f64),

    #[error("state is not in the exposed face of the given direction")]
    NotInFace,

    #[error("direction is not supported on the state's support projector (leak {0:e})")]
    NotSupported(f64),

    #[error("direction is not traceless (trace {0:e})")]
    NotTraceless(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver failed to converge after {iterations} iterations (gradient norm {grad:e})")]
    SolverFailure { iterations: usize, grad: f64 },

    #[error("projection onto the family is not attained")]
    ProjectionNotAttained,

    #[error("sweep under-resolved: {0}")]
    UnderResolved(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("serialization: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;
