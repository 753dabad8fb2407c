use thiserror::Error;

/// Errors raised by state evolution, table construction and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Sizes or indices that do not fit together.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A parameter or value outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed objective or trace file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Expected queries are undefined when the solution is never observed.
    #[error("undefined expectation: {0}")]
    UndefinedExpectation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
