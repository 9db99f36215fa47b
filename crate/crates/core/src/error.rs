use std::path::PathBuf;

use crate::features::SchemaId;
use crate::model::{SessionId, Tick};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("session {0} already exists")]
    DuplicateSession(SessionId),

    #[error("unknown session {0}")]
    UnknownSession(SessionId),

    #[error("comment at tick {got} arrives before last comment at tick {last} in session {session}")]
    CommentOrder { session: SessionId, last: Tick, got: Tick },

    #[error("schema mismatch: expected {expected}, got {got}")]
    SchemaMismatch { expected: SchemaId, got: SchemaId },

    #[error("feature vector for {schema} must have {expected} values, got {got}")]
    FeatureLength {
        schema: SchemaId,
        expected: usize,
        got: usize,
    },

    #[error("non-finite feature value at index {0}")]
    NonFinite(usize),

    #[error("batch range {upto} exceeds {len} comments")]
    OutOfRange { upto: usize, len: usize },

    #[error("delta covers {delta} comments but batch size is {batch}")]
    DeltaMismatch { delta: usize, batch: usize },

    #[error("training data needs both classes and at least two examples")]
    SingleClass,

    #[error("confidence {0} outside [0, 1]")]
    ConfidenceRange(f64),

    #[error("confidence history of session {0} is empty")]
    EmptyHistory(SessionId),

    #[error("session {0} is already admitted")]
    AlreadyAdmitted(SessionId),

    #[error("session {0} is still enqueued")]
    StillQueued(SessionId),

    #[error("session {0} was never admitted")]
    NotAdmitted(SessionId),

    #[error("no threshold reaches precision {0}")]
    PrecisionUnattainable(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cached features diverge from batch extraction for session {session} at index {index}")]
    CacheDivergence { session: SessionId, index: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}, line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
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

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }
}
