use thiserror::Error;

/// Failures raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("contour infeasible: {0}")]
    ContourInfeasible(String),
    #[error("divergent settings: {0}")]
    Divergent(String),
    #[error("no convergence: {0}")]
    NotConverged(String),
    #[error("root bracket failure: objective {lo_value} at {lo}, {hi_value} at {hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        lo_value: f64,
        hi_value: f64,
    },
}

pub type Result<T> = std::result::Result<T, NumError>;
