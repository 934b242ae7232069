use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate page id `{0}`")]
    DuplicatePage(String),

    #[error("duplicate entity id `{0}`")]
    DuplicateEntity(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("unresolvable sentence {page}:{line}")]
    UnresolvableSentence { page: String, line: u32 },

    #[error("degenerate table: every row and column marginal must be positive")]
    DegenerateTable,

    #[error("regime `{0}` selects no training claims with evidence")]
    EmptyRegime(String),

    #[error("training data has no examples labelled {0}")]
    MissingClass(String),

    #[error("no verifiable claims")]
    NoVerifiableClaims,

    #[error("prediction refers to unknown claim id {0}")]
    UnknownClaim(u64),

    #[error("missing verdict for claim id {0}")]
    MissingVerdict(u64),

    #[error("model file: {0}")]
    Model(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
