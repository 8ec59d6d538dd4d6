use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or structural constraint was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: unknown configuration key `{key}`")]
    UnknownKey { key: String, line: usize },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    /// The input file is not a mono 16-bit PCM WAV file.
    #[error("{}: unsupported or malformed WAV: {message}", path.display())]
    WavFormat { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
