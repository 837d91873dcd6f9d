use std::path::PathBuf;

use chrono::NaiveDateTime;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left} vs {right}")]
    Shape {
        op: &'static str,
        left: String,
        right: String,
    },

    #[error("training diverged at epoch {epoch}, step {step}: non-finite {what}")]
    Divergence {
        epoch: usize,
        step: usize,
        what: &'static str,
    },

    #[error("gradient cache does not match model: {0}")]
    CacheMismatch(String),

    #[error("station {station}: every temperature reading is missing")]
    UnrecoverableGap { station: String },

    #[error("weather stations do not share a timestamp grid; {} timestamps missing (first: {})", missing.len(), missing.first().map(|t| t.to_string()).unwrap_or_default())]
    GridMismatch { missing: Vec<NaiveDateTime> },

    #[error("timestamp {0} occurs more than twice")]
    TriplicateTimestamp(NaiveDateTime),

    #[error("duplicate join key ({0}, dst_flag={1})")]
    DuplicateJoinKey(NaiveDateTime, u8),

    #[error("need at least {min} rows, got {rows}")]
    TooFewRows { rows: usize, min: usize },

    #[error("{rows} rows cannot fill a window of {window}")]
    EmptyDataset { rows: usize, window: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("empty input")]
    EmptyInput,

    #[error("MAPE undefined: every actual value is zero")]
    MapeUndefined,

    #[error("unsupported {kind} version {found} (expected {expected})")]
    Version {
        kind: &'static str,
        found: u32,
        expected: u32,
    },

    #[error("corrupt {kind} file: {detail}")]
    Corrupt { kind: &'static str, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: impl ToString, right: impl ToString) -> Self {
        Error::Shape {
            op,
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Tags an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Coarse category used by the CLI to pick an exit code.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Divergence { .. } => ErrorKind::Numeric,
            Error::InvalidArgument(_) | Error::Version { .. } => ErrorKind::Config,
            Error::Io { .. } => ErrorKind::Io,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
    Io,
}
