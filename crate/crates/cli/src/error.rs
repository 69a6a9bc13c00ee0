use std::path::PathBuf;

/// Failures of the benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// The experiment description is unusable.
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] asymsens::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Parse { path: path.into(), message: message.into() }
    }

    /// Process exit code: 2 for a bad spec, 3 for anything touching files.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::InvalidSpec(_) | Self::Core(_) => 2,
            Self::Io { .. } | Self::Parse { .. } | Self::Json(_) | Self::Csv(_) => 3,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
