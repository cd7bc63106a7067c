use thiserror::Error;

/// Exit code for certification or verification failures.
pub const EXIT_FAILED: i32 = 2;
/// Exit code for parse, usage and input errors.
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] hamforge::Error),
}

impl CliError {
    pub fn parse(path: &str, location: impl Into<String>, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: path.to_string(),
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use hamforge::Error as E;
        match self {
            CliError::Core(
                E::SubspaceMismatch { .. }
                | E::RankMismatch { .. }
                | E::TooFar(_)
                | E::DegenerateCut { .. }
                | E::CapExceeded { .. }
                | E::BudgetViolation(_),
            ) => EXIT_FAILED,
            _ => EXIT_USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
