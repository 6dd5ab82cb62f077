use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad flags, config fields or problem names.
    #[error("usage: {0}")]
    Usage(String),

    /// `row` is 1-based over data rows (the header is not counted).
    #[error("{}: row {row}: {message}", path.display())]
    Parse { path: PathBuf, row: usize, message: String },

    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {message}")]
    Format { context: String, message: String },

    #[error(transparent)]
    Solver(#[from] curvopt_core::Error),
}

impl HarnessError {
    pub fn usage(msg: impl Into<String>) -> Self {
        HarnessError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for anything the caller can fix by changing the
    /// invocation, 3 for failures inside a solve, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use curvopt_core::Error as E;
        match self {
            HarnessError::Usage(_) | HarnessError::Parse { .. } | HarnessError::Schema { .. } => 2,
            HarnessError::Solver(E::InvalidConfig(_) | E::BatchTooLarge { .. } | E::Schema(_) | E::DimensionMismatch { .. }) => 2,
            HarnessError::Solver(_) => 3,
            HarnessError::Io { .. } | HarnessError::Format { .. } => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
