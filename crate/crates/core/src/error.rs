use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid sample")]
    InvalidSample,
    #[error("risk level must lie in (0, 1], got {0}")]
    InvalidLevel(f64),
    #[error("degenerate interval")]
    DegenerateInterval,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("infeasible equalities")]
    InfeasibleEqualities,
    #[error("empty feasible set: {0}")]
    EmptyFeasibleSet(String),
    #[error("projection tolerance not met")]
    ProjectionTolerance,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("affine q required")]
    AffineRequired,
    #[error("exact map unavailable")]
    MissingExactMap,
    #[error("oracle did not converge")]
    OracleNotConverged,
    #[error("game not strictly monotone")]
    NotStrictlyMonotone,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
