use thiserror::Error;

use crate::estimators::FitTrace;

pub type Result<T, E = RsrError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RsrError {
    #[error("matrix has no nonzero entries")]
    AllZero,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero vector has no defined direction")]
    ZeroVector,

    #[error("direction is not tangent to the subspace (max |B^T H| = {max_violation:e})")]
    TangencyViolation { max_violation: f64 },

    #[error("basis is not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("column {index} is the zero vector")]
    ZeroColumn { index: usize },

    #[error("points {i} and {j} are identical, their difference cannot be spherized")]
    DuplicatePair { i: usize, j: usize },

    #[error("{what} requires {requirement}")]
    InvalidArgument {
        what: &'static str,
        requirement: String,
    },

    #[error("N_in = {n_in} is not divisible by d = {d}")]
    Divisibility { n_in: usize, d: usize },

    #[error("instance too large: N = {n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("data spans only {rank} dimensions, fewer than d = {d}")]
    RankDeficientData { rank: usize, d: usize },

    #[error("point {index} does not lie on the given subspace")]
    OffSubspace { index: usize },

    #[error("inliers do not permeate the subspace (lambda_d / lambda_1 = {ratio:e})")]
    DegenerateInliers { ratio: f64 },

    #[error("energy became non-finite at iteration {iteration}")]
    NonFiniteEnergy { iteration: usize, trace: Box<FitTrace> },

    #[error("dataset has no ground-truth subspace")]
    MissingTruth,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl RsrError {
    pub(crate) fn invalid(what: &'static str, requirement: impl Into<String>) -> Self {
        RsrError::InvalidArgument {
            what,
            requirement: requirement.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        RsrError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
