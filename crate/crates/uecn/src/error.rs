use std::path::{Path, PathBuf};

/// Everything that can stop a run, one variant per exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("stage {stage}: missing input {}", path.display())]
    StageInputMissing { stage: &'static str, path: PathBuf },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("stage {stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl Error {
    /// Process exit code; 2 is left to argument parsing.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 3,
            Error::Io { .. } => 4,
            Error::StageInputMissing { .. } => 5,
            Error::Format { .. } => 6,
            Error::Stage { .. } => 7,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, message: impl ToString) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub(crate) fn stage(stage: &'static str, message: impl ToString) -> Self {
        Error::Stage {
            stage,
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
