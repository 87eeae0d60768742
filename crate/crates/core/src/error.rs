use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {count} nodes")]
    InvalidNode { node: usize, count: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("coalition too small: {0}")]
    TooSmall(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("no feasible sample: {0}")]
    NoFeasibleSample(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("target time is {days:.2} days from epoch, outside the {limit_days}-day window")]
    OutOfWindow { days: f64, limit_days: f64 },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
