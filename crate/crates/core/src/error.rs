use thiserror::Error;

/// Errors raised by the geometry, solvers and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("point is infeasible: numerical rank {rank} exceeds bound {bound}")]
    Infeasible { rank: usize, bound: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cost model has no gradient Lipschitz constant")]
    MissingLipschitz,

    #[error("factors are not balanced: |L^T L - R^T R| = {gap:e}")]
    Unbalanced { gap: f64 },

    #[error("direction is not tangent to the Stiefel manifold (defect {defect:e})")]
    NotTangent { defect: f64 },

    #[error("rank violation at stage {stage}: sigma_{{r+1}} = {sigma:e} exceeds tolerance {tol:e}")]
    RankViolation { stage: usize, sigma: f64, tol: f64 },

    #[error("dense Hessian of dimension {dim} exceeds the limit {limit}; reduce m, n or r")]
    TooLarge { dim: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected: expected.into(),
            got: got.into(),
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
