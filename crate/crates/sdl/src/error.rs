use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdlError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{} already exists (pass --force to overwrite)", .0.display())]
    Exists(PathBuf),
    #[error("numeric failure: {0}")]
    Numeric(#[from] sdl_core::Error),
    #[error("acceptance thresholds failed")]
    Threshold,
}

impl SdlError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable process exit code: 2 input, 3 numeric precondition, 4 acceptance.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } | Self::Json(_) | Self::Csv(_) | Self::Input(_) | Self::Exists(_) => 2,
            Self::Numeric(_) => 3,
            Self::Threshold => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, SdlError>;
