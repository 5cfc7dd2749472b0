//! Error type shared across the toolkit.
//!
//! Errors split into three families, mirroring the CLI exit codes: usage
//! errors are handled by the CLI itself (exit 1), data errors carry exit
//! code 2, and internal invariant violations carry exit code 3.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input data, with the line that caused it when known.
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corpus contains no documents")]
    EmptyCorpus,

    #[error("every document is empty after preprocessing")]
    EmptyAfterPreprocess,

    #[error("unknown stopword list `{0}`")]
    UnknownStopwordList(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("graph has no edges (total weight is zero)")]
    EdgelessGraph,

    #[error("exact partition search supports at most {max} nodes, got {got}")]
    TooManyNodes { max: usize, got: usize },

    #[error("annotation file references unknown topic id {0}")]
    UnknownTopic(usize),

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Signals internal corruption (count underflow, inconsistent tables).
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

impl Error {
    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// CLI exit code for this error: 3 for internal invariant violations,
    /// 2 for everything else (data errors). Usage errors never reach here.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
