use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("point is on the boundary (rho = 0); operation requires an interior point")]
    BoundaryPoint,

    #[error("point lies outside the domain: {0}")]
    OutsideDomain(String),

    #[error("principal-branch precondition violated: Re rho(z,w) = {0} <= 0")]
    BranchViolation(f64),

    #[error("internal metric error: radicand {0} outside [0,1)")]
    MetricInternal(f64),

    #[error("divergent by the integral identity: {0}")]
    Divergent(String),

    #[error("hypothesis violated: {0}")]
    Regime(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("running norm estimate keeps growing; integrand is likely non-integrable")]
    LikelyNonIntegrable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
