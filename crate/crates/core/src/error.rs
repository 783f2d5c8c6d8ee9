use thiserror::Error;

/// Errors raised by solvers, constructors and data loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ball and hyperplane do not intersect (center distance {distance} > radius {radius})")]
    InfeasibleSubproblem { distance: f64, radius: f64 },

    #[error("bracket inverted after initialization: lower {lower} > upper {upper}")]
    BracketInversion { lower: f64, upper: f64 },

    #[error("budget {total} cannot allot at least one inner iteration to each of {rounds} rounds")]
    InvalidBudget { total: u64, rounds: u64 },

    #[error("linear system is numerically singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
