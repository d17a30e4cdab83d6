use std::path::PathBuf;

/// Errors raised by the pipeline library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate post id `{0}`")]
    DuplicatePostId(String),

    #[error("invalid dependency tree in post `{post_id}` sentence {sent_index}: {message}")]
    InvalidTree {
        post_id: String,
        sent_index: usize,
        message: String,
    },

    #[error("offset mismatch in post `{post_id}`: {message}")]
    OffsetMismatch { post_id: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cannot serialize IRI for key `{key}`: {message}")]
    Iri { key: String, message: String },

    #[error("linking service failure: {0}")]
    Linking(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("undefined agreement statistic: {0}")]
    Undefined(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
