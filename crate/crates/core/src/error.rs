use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation at zero with negative exponent support in {0}")]
    Domain(&'static str),
    #[error("invalid degree: {0}")]
    InvalidDegree(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("weight is not positive on the sampling grid (min sample {min:e})")]
    NotPositive { min: f64 },
    #[error("quadrature did not converge (last change {delta:e} at grid {grid})")]
    NotConverged { delta: f64, grid: usize },
    #[error("polynomial support exceeds the available moments ({0})")]
    SupportExceeded(String),
    #[error("level ({n},{m}) exceeds the moment range ({k},{l})")]
    LevelExceedsMoments { n: usize, m: usize, k: usize, l: usize },
    #[error("moment matrix at level ({n},{m}) is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { n: usize, m: usize, min_eig: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("K K1^T is not negligible (norm {0:e})")]
    ConditionViolated(f64),
    #[error("rank overflow: r + r1 = {r} + {r1} > {n}")]
    RankOverflow { r: usize, r1: usize, n: usize },
    #[error("invariant subspace meets the leading coordinate block (deviation {0:e})")]
    StructureUnattainable(f64),
    #[error("expansion matrix is not an isometry (deviation {0:e})")]
    NotIsometry(f64),
    #[error("null space is not one-dimensional")]
    NullSpaceDegenerate,
    #[error("factor cross-check failed (residual {0:e})")]
    CrossCheckFailed(f64),
    #[error("coefficient K is not negligible (norm {0:e})")]
    NotStableCase(f64),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("polynomial has no nonzero coefficient")]
    DegenerateLeadingCoefficient,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
