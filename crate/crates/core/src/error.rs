use std::path::PathBuf;

use crate::types::Context;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("stream contains no samples")]
    EmptyStream,

    #[error("{path}: column {column:?} not found in header")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: row {row}, field {field}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        field: String,
        message: String,
    },

    #[error("session {user}/{session_dir} has no entry in labels.csv")]
    LabelMissing { user: String, session_dir: String },

    #[error("user {user} has more than one session {index} in context {context}")]
    DuplicateSession {
        user: String,
        context: Context,
        index: u8,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("ranking has {available} features, {requested} requested")]
    InsufficientFeatures { requested: usize, available: usize },

    #[error("training pool is empty")]
    EmptyPool,

    #[error("no scores to evaluate")]
    EmptyScores,

    #[error("percentile {0} outside [50, 100]")]
    InvalidPercentile(f64),

    #[error("dataset has no sessions for context {0}")]
    MissingContext(Context),

    #[error("data has zero variance")]
    DegenerateData,

    #[error("model schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
