use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("query parse error: {0}")]
    Parse(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("failed to ingest document `{doc_id}` from {}: {source}", path.display())]
    Ingest {
        doc_id: String,
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("import error at line {line}: {message}")]
    Import { line: usize, message: String },

    #[error("failed to load `{file}`: {message}")]
    Load { file: String, message: String },

    #[error("integrity check failed for `{file}`: checksum mismatch")]
    Integrity { file: String },

    #[error("{0} not available")]
    Capability(&'static str),

    #[error("unknown corpus `{0}`")]
    UnknownCorpus(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn load(file: impl Into<String>, message: impl ToString) -> Self {
        Error::Load {
            file: file.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn import(line: usize, message: impl Into<String>) -> Self {
        Error::Import {
            line,
            message: message.into(),
        }
    }
}
