use thiserror::Error;

pub type Result<T, E = FusionError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("covariance is not positive definite (eigenvalue ratio {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("need at least {needed} sources, got {got}")]
    TooFewSources { needed: usize, got: usize },

    #[error("unsupported dimension {0} for quadrature (1 or 2 only)")]
    UnsupportedDimension(usize),

    #[error("FFCC weight total must lie in (0, 1], got {0}")]
    InvalidDelta(f64),

    #[error("degenerate particle update: {0}")]
    DegenerateUpdate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("solver failed: {0}")]
    Solver(String),
}
