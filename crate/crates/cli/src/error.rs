use std::fmt;

/// Failures surfaced by the command line, each with its exit status.
#[derive(Debug)]
pub enum CliError {
    /// A configuration field was missing or malformed.
    Config { field: String, message: String },
    Usage(String),
    Io(String),
    /// A run finished but a check on its output failed.
    CheckFailed(String),
    Core(fcbio::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e {
                fcbio::Error::Io(_) | fcbio::Error::Parse { .. } | fcbio::Error::InvalidData(_) => 3,
                fcbio::Error::InvalidArgument(_)
                | fcbio::Error::InvalidBudget { .. }
                | fcbio::Error::BracketInversion { .. } => 2,
                fcbio::Error::InfeasibleSubproblem { .. } | fcbio::Error::SingularSystem { .. } => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "invalid value for '{field}': {message}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::CheckFailed(m) => write!(f, "check failed: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fcbio::Error> for CliError {
    fn from(e: fcbio::Error) -> Self {
        CliError::Core(e)
    }
}
