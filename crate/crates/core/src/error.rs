use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed record in a line-oriented input. `line` is 1-based.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("unknown recording id `{0}`")]
    UnknownRecording(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("sample rate mismatch for `{what}`: expected {expected} Hz, found {found} Hz")]
    RateMismatch { what: String, expected: u32, found: u32 },

    #[error("no inventory entry for unit `{0}`")]
    MissingUnit(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for this error: 1 usage/config, 2 data validation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::Parse { .. }
            | Error::UnknownRecording(_)
            | Error::Validation(_)
            | Error::RateMismatch { .. }
            | Error::MissingUnit(_)
            | Error::Degenerate(_) => 2,
            Error::Io { .. } | Error::Wav { .. } | Error::Json { .. } => 3,
        }
    }
}
