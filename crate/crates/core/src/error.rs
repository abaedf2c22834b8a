use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("record {id}: {message}")]
    Ingest { id: String, message: String },

    #[error("{path}:{line}: row {row} has width {actual}, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        row: usize,
        expected: usize,
        actual: usize,
    },

    #[error("duplicate record id {0:?}")]
    DuplicateId(String),

    #[error("synthetic corpus generation: {0}")]
    Generation(String),

    #[error("training diverged at epoch {epoch}, record {record}: loss = {loss}")]
    Divergence {
        epoch: usize,
        record: String,
        loss: f64,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("unknown word {0:?}")]
    UnknownWord(String),

    #[error("unknown segment id {0:?}")]
    UnknownId(String),

    #[error("record {0} has no phoneme sequence")]
    MissingPhonemes(String),

    #[error("average precision is undefined for an empty relevant set")]
    EmptyRelevantSet,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            actual,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
