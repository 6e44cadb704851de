use thiserror::Error;

/// Errors raised by the receiver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("covariance is not positive definite")]
    SingularCovariance,
    #[error("precision-form fusion is not positive definite")]
    IndefiniteFusion,
    #[error("mixture has no component with finite weight")]
    EmptyMixture,
    #[error("innovation covariance is not positive definite")]
    SingularInnovation,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no pilot within the estimation window of index {index}")]
    NoPilotsInWindow { index: usize },
    #[error("code construction failed: {0}")]
    ConstructionFailed(String),
    #[error("parity-check matrix is rank deficient")]
    RankDeficient,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
