use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
///
/// The variants are grouped by who is at fault: `Config` for bad parameters,
/// `Format`/`Io` for bad input data, and the rest for broken caller contracts
/// or invalid state.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("model is untrained: every class accumulator is zero")]
    Untrained,

    #[error("loss store has not been initialized")]
    Uninitialized,

    #[error("no data: every class has an empty union")]
    NoData,

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
