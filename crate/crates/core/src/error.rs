use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("conditioning block is numerically singular")]
    SingularConditioning,
    #[error("design Gram matrix is rank deficient")]
    RankDeficient,
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bipartite split left a layer empty after {attempts} attempts")]
    DegenerateSplit { attempts: usize },
    #[error("graph has no node with two or more parents")]
    NoCollider,
    #[error("model covariance differs from the SEM covariance by {max_diff:e}")]
    CovarianceMismatch { max_diff: f64 },
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("{count} candidates exceed the enumeration limit {limit}")]
    TooManyCandidates { count: u128, limit: u128 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
