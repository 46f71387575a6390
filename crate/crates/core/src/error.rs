use std::path::PathBuf;

use crate::pwl::Interval;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point {point} lies outside the domain {domain}")]
    OutOfDomain { point: f64, domain: Interval },

    #[error("operand domains differ: {0} vs {1}")]
    DomainMismatch(Interval, Interval),

    #[error("sum of opposite infinities is undefined")]
    UndefinedSum,

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("intervals {0} and {1} do not overlap")]
    EmptyIntersection(Interval, Interval),

    #[error("malformed partition: {0}")]
    Partition(String),

    #[error("function is not piecewise constant")]
    NotPiecewiseConstant,

    #[error("every piece of the function is infinite")]
    NoFinitePiece,

    #[error("a branch step produced no subproblems")]
    EmptyBranch,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
