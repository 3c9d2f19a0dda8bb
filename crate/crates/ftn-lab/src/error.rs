use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: field `{field}`: {reason}")]
    Field { field: String, reason: String },

    #[error("config error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("unknown experiment or config `{0}`; run `ftn-lab list` for the catalog")]
    UnknownConfig(String),

    #[error(transparent)]
    Core(#[from] ftn_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("could not start worker pool: {0}")]
    Threads(String),
}

impl LabError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::Field {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for resource budgets.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Field { .. } | LabError::Parse { .. } | LabError::UnknownConfig(_) => 2,
            LabError::Core(ftn_core::Error::StateExplosion { .. }) => 3,
            LabError::Core(ftn_core::Error::InvalidParameter { .. }) => 2,
            _ => 1,
        }
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
