use std::fmt;

use thiserror::Error;

/// Which elimination stage produced a failing pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Forward,
    Backward,
    Combined,
    ForwardHalf,
    BackwardHalf,
    Exchange,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Forward => "forward",
            Stage::Backward => "backward",
            Stage::Combined => "combined",
            Stage::ForwardHalf => "forward-half",
            Stage::BackwardHalf => "backward-half",
            Stage::Exchange => "exchange",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// `k` is the 1-based block index.
    #[error("{stage} pivot block {k} is not positive definite (lambda_min = {lambda_min:e})")]
    PivotNotPositiveDefinite {
        k: usize,
        stage: Stage,
        lambda_min: f64,
    },

    #[error("matrix of size {size} exceeds the dense cap {cap}")]
    SizeCapExceeded { size: usize, cap: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("empty block sequence")]
    EmptySequence,

    #[error("bound is vacuous: smallest singular value is zero")]
    VacuousBound,

    #[error("{which} covariance at step {k} is not positive definite")]
    CovarianceNotPD { k: usize, which: &'static str },

    #[error("combined information matrix at step {k} is not positive definite")]
    CombinedNotPD { k: usize },

    #[error("identity {which} violated at step {k} (relative error {magnitude:e})")]
    IdentityViolation {
        k: usize,
        which: String,
        magnitude: f64,
    },

    #[error("singular input matrix")]
    SingularInput,

    #[error("measurement information at step {k} is singular; the Woodbury path does not apply")]
    MeasurementInfoSingular { k: usize },

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
