use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed shape: {0}")]
    Shape(String),
    #[error("cannot project a triangle of size 1")]
    CannotProject,
    #[error("row index {index} out of range 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("log-gamma pole at {0}")]
    Pole(i64),
    #[error("divergent parameters: {0}")]
    Divergent(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("incompatible arguments: {0}")]
    Incompatible(String),
    #[error("accuracy not reached: best value {best} with error estimate {error}")]
    AccuracyNotReached { best: f64, error: f64 },
    #[error("integration dimension too large: {0}")]
    DimensionTooLarge(String),
    #[error("proposal does not support the integrand: {0}")]
    ProposalSupport(String),
    #[error("rejection sampler exceeded {0} retries")]
    RetryCap(usize),
    #[error("eigensolver failure: {0}")]
    Eigen(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
