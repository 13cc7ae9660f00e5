use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("letter {letter} is out of range for an alphabet of size {size}")]
    LetterOutOfRange { letter: usize, size: usize },

    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// An exhaustive or enumerative computation would exceed its size guard.
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("exact mode requires rational model parameters")]
    NotRational,

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("count overflowed its fixed-width accumulator")]
    Overflow,
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SizeGuard(_) | Error::Overflow => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
