use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("level {level}: label {label} is out of range for input length {n}")]
    LabelOutOfRange { level: usize, label: usize, n: usize },

    #[error("accept index {index} is out of range for {bound} states")]
    AcceptOutOfRange { index: usize, bound: usize },

    #[error("input has length {got}, expected {expected}")]
    InputLength { got: usize, expected: usize },

    #[error("invalid bit string: {0}")]
    BitString(String),

    #[error("level {level} queries {distinct} distinct variables; exhaustive check is capped at {max}")]
    TooManyLabels { level: usize, distinct: usize, max: usize },

    #[error("level {level}, node {node}: 1-transition is not a phase multiple of the 0-transition (residual {residual:e})")]
    NotPhaseRelated { level: usize, node: usize, residual: f64 },

    #[error("operation requires a program in restricted form")]
    NotRestricted,

    #[error("vector is not normalized (norm {0})")]
    Unnormalized(f64),

    #[error("hybrid switch point {k} out of range 0..={levels}")]
    SwitchOutOfRange { k: usize, levels: usize },

    #[error("fixed string has weight {weight}, expected {k} or {k_plus_delta}")]
    WeightMismatch { weight: usize, k: usize, k_plus_delta: usize },

    #[error("circuit: {0}")]
    Circuit(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}
