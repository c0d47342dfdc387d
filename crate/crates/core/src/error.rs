use std::fmt;

use thiserror::Error;

use crate::lasso::LassoFit;
use crate::linalg::NormKind;

pub type Result<T> = std::result::Result<T, Error>;

/// Second member of a pair whose joint observation probability was zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMember {
    Covariate(usize),
    Response,
}

impl fmt::Display for PairMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairMember::Covariate(k) => write!(f, "covariate {k}"),
            PairMember::Response => write!(f, "the response"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid missingness mechanism: {0}")]
    InvalidMechanism(String),

    #[error("covariate {j} is never observed jointly with {k}")]
    ZeroPairProbability { j: usize, k: PairMember },

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("observation probability must lie in (0, 1], got {value} at {location}")]
    InvalidProbability { value: f64, location: String },

    #[error("at least {required} samples are required, got {n}")]
    TooFewSamples { n: usize, required: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("input is already positive definite (lambda_min = {lambda_min})")]
    AlreadyPositiveDefinite { lambda_min: f64 },

    #[error("no minimiser exists for the {norm:?} norm: lambda_min + M2 = {gap} > 0")]
    NoSolutionForNorm { norm: NormKind, gap: f64 },

    #[error("coordinate descent did not converge after {} sweeps (KKT violation {})", .fit.iterations, .fit.max_kkt_violation)]
    Unconverged { fit: Box<LassoFit> },

    #[error("cannot build a tuning grid: both the naive coefficients and X'y/n are zero")]
    DegenerateGrid,

    #[error("fold {fold}: {source}")]
    FoldEstimation {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
