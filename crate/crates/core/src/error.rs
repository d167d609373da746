use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// Wraps an error raised while reading a particular file.
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: Box<Error> },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("context {id}: {msg}")]
    Span { id: String, msg: String },

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("invalid {what}: {msg}")]
    Invalid { what: &'static str, msg: String },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("malformed template {template:?}: {msg}")]
    Template { template: String, msg: String },

    #[error("plugin: {0}")]
    Plugin(String),

    #[error("capability {0:?} is not available")]
    MissingCapability(&'static str),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            msg: msg.into(),
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
