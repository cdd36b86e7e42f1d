use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid frame grid: {0}")]
    InvalidGrid(String),

    #[error("target out of range: {0}")]
    TargetOutOfRange(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("target {index} has a fractional delay or Doppler index")]
    FractionalTargetUnsupported { index: usize },

    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("CFAR window {window:?} does not fit a {rows}x{cols} grid")]
    WindowTooLarge {
        window: (usize, usize),
        rows: usize,
        cols: usize,
    },

    #[error("invalid CFAR window: {0}")]
    InvalidWindow(String),

    #[error("both neighbour magnitudes are zero")]
    ZeroDenominator,

    #[error("Fisher information matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularFisher { condition: f64 },

    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterLength { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
