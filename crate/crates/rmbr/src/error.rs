use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: no records", path.display())]
    EmptyInput { path: PathBuf },

    #[error(transparent)]
    Core(#[from] rmbr_core::Error),

    #[error(transparent)]
    Service(#[from] crate::service::ServiceError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, message: message.into() }
    }

    /// True for problems with the inputs or flags, as opposed to failures
    /// while running (I/O, scorer transport).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse { .. } | Error::EmptyInput { .. } => true,
            Error::Core(e) => !matches!(e, rmbr_core::Error::Utility { .. }),
            Error::Service(e) => matches!(e, crate::service::ServiceError::Address(_)),
            Error::Io { .. } => false,
        }
    }
}
