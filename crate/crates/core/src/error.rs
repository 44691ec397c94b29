use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("undecided within bound: {0}")]
    Undecided(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
}

impl Error {
    /// Process exit code: 1 for bad input or configuration, 2 for exhausted
    /// searches and undecided bounds, 3 for internal invariant failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Unsupported(_) | Error::Config(_) | Error::NotInvertible(_) => 1,
            Error::Invariant(_) => 3,
            Error::SearchExhausted(_) | Error::Undecided(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
