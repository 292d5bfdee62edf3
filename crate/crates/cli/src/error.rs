use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] solenoid::Error),

    #[error("property check failed: {0}")]
    Property(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Core(solenoid::Error::Domain(_)) => 2,
            CliError::Core(solenoid::Error::Precision { .. }) => 3,
            CliError::Core(solenoid::Error::Numeric(_)) | CliError::Property(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
