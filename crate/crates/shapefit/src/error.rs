use std::path::{Path, PathBuf};

/// Errors from the file layer and the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, message: impl ToString) -> Self {
        Error::Parse { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn compute(e: impl ToString) -> Self {
        Error::Compute(e.to_string())
    }

    /// Process exit status: 1 for failed computations, 2 for bad usage or
    /// unreadable inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Compute(_) => 1,
            Error::Io { .. } | Error::Parse { .. } | Error::Usage(_) => 2,
        }
    }
}
