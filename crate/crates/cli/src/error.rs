use thiserror::Error;

/// Exit code for malformed or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for violated numerical preconditions.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code for I/O and serialization failures.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Core(#[from] ecps::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Core(e) if e.is_numerical_precondition() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_CONFIG,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
        }
    }
}
