use thiserror::Error;

/// Errors raised by the computational modules.
///
/// The `Display` form leads with the error's name so that front ends can
/// surface it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("PrecisionError: {0}")]
    Precision(String),

    #[error("NotIncreasingError: term {index} ({value}) does not exceed its predecessor")]
    NotIncreasing { index: usize, value: String },

    #[error("ParseError: line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("SizeError: {0}")]
    Size(String),

    #[error("SieveLimitError: max support element {max} exceeds sieve limit {limit}")]
    SieveLimit { max: u64, limit: u64 },

    #[error("QuadratureError: {0}")]
    Quadrature(String),

    #[error("SmoothnessError: support element {element} has prime factor {factor} > {prime_limit}")]
    Smoothness {
        element: u64,
        factor: u64,
        prime_limit: u64,
    },

    #[error("SeriesError: {0}")]
    Series(String),

    #[error("DomainError: {0}")]
    Domain(String),

    #[error("IoError: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
