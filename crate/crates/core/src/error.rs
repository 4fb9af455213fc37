use std::fmt;
use std::io;

/// Toolkit-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Invalid configuration (bad mode combination, cap below specials, ...).
    Config(String),
    /// Tensor dimension mismatch.
    Shape(String),
    /// Malformed or inconsistent input data.
    Data(String),
    /// Corrupt, truncated, or version-incompatible file.
    Format(String),
    /// Training loss became non-finite.
    Diverged(String),
    Io(io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Diverged(msg) => write!(f, "numeric divergence: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}
