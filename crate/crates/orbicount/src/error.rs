use thiserror::Error;

/// Unified error type for the crate.
///
/// Variants mirror the preconditions of the public operations; every
/// constructor that validates an invariant reports through one of these.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("signature requires p ≥ 1, q ≥ 1 and p + q > 2 (got p={p}, q={q})")]
    BadSignature { p: usize, q: usize },

    #[error("matrix does not preserve the form (residual {residual:.3e})")]
    NotFormPreserving { residual: f64 },

    #[error("matrix determinant has modulus {det_abs:.6} ≠ 1")]
    NotUnimodular { det_abs: f64 },

    #[error("matrix is not proximal (top log-eigenvalue gap {gap:.3e} below threshold {threshold:.3e})")]
    NotProximal { gap: f64, threshold: f64 },

    #[error("zero vector cannot represent a projective point")]
    ZeroVector,

    #[error("plane is not negative definite (eigenvalue {eigenvalue:.3e} of restricted form)")]
    NotNegativeDefinite { eigenvalue: f64 },

    #[error("plane has dimension {got}, expected {expected}")]
    PlaneDimension { got: usize, expected: usize },

    #[error("basepoint is not time-like (self-pairing {pairing:.3e})")]
    NotTimelike { pairing: f64 },

    #[error("negative plane does not contain the basepoint (residual {residual:.3e})")]
    TauMissesBasepoint { residual: f64 },

    #[error("pair is {class}, a space-like separation is required")]
    NotSpacelike { class: &'static str },

    #[error("pair is within {margin:.3e} of light-like degeneracy and cannot be classified reliably")]
    NearLightlike { margin: f64 },

    #[error("basepoints coincide; the pair spans no geodesic")]
    CoincidentBasepoints,

    #[error("decomposition reconstruction residual {residual:.3e} exceeds tolerance")]
    DecompositionResidual { residual: f64 },

    #[error("transversality violation: pairing magnitude {value:.3e} below 1e-12")]
    TransversalityViolation { value: f64 },

    #[error("word is empty after cyclic reduction; conjugacy classes index nontrivial elements")]
    TrivialCyclicWord,

    #[error("letter {letter} outside alphabet of rank {rank}")]
    LetterOutOfRange { letter: i32, rank: usize },

    #[error("free group rank must be at least 2, got {rank}")]
    RankTooSmall { rank: usize },

    #[error("ping-pong certificate failed: {0}")]
    PingPong(String),

    #[error("axis endpoints must be distinct unit directions")]
    BadAxis,

    #[error("block of size {m}+1 does not fit in signature ({p},{q})")]
    BlockTooLarge { m: usize, p: usize, q: usize },

    #[error("singular value gap {gap:.3e} at depth {depth} is below the threshold {threshold:.3e} required for limit-set sampling")]
    GapTooSmall { gap: f64, depth: usize, threshold: f64 },

    #[error(
        "basepoint margin violation: {exceptional} non-space-like displacements within the \
         outermost {spheres} enumeration spheres"
    )]
    MarginViolation { exceptional: u64, spheres: usize },

    #[error("fit needs at least {needed} complete grid points, found {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("no prior asymptotic fit available: {0}")]
    MissingFit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error at line {line} ({field}): {message}")]
    Config {
        line: usize,
        field: String,
        message: String,
    },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn config(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, err: &std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
