use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix must be square with n >= 2, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not trace-free: |tr A| = {trace_abs:.3e} (tolerance {bound:.3e})")]
    NotTraceFree { trace_abs: f64, bound: f64 },

    #[error("matrix is scalar; its orbit misses the complement of Z")]
    ScalarMatrix,

    #[error("zero matrix")]
    ZeroMatrix,

    #[error("point lies in Z (K undefined): denominator ratio {ratio:.3e}")]
    InZ { ratio: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenSolver,

    #[error("ambiguous eigenvalue clustering: {0}")]
    AmbiguousClustering(String),

    #[error("inconsistent Jordan structure: {0}")]
    InconsistentJordan(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partitions of different size: {0} vs {1}")]
    PartitionSizeMismatch(u32, u32),

    #[error("constant undefined for the trivial partition (1^n)")]
    TrivialPartition,

    #[error("empty input")]
    Empty,

    #[error("constant input: at least two distinct values required")]
    ConstantInput,

    #[error("operation requires a non-nilpotent matrix")]
    Nilpotent,

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
