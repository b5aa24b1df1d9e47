use std::fmt;

use fusionlab::FusionError;

/// Process exit statuses.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_HEALTH: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input, unmet preconditions.
    Usage(String),
    /// Input parsed but violates a data invariant.
    Invariant(String),
    /// The experiment ran but too many trials diverged.
    Health(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Health(_) => EXIT_HEALTH,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Invariant(m) => write!(f, "invalid data: {m}"),
            CliError::Health(m) => write!(f, "experiment health check failed: {m}"),
        }
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        match e {
            FusionError::TooFewSources { .. }
            | FusionError::InvalidConfig(_)
            | FusionError::InvalidDelta(_)
            | FusionError::UnsupportedDimension(_) => CliError::Usage(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = Result<T, CliError>;
