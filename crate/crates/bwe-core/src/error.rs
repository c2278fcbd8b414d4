use core::fmt;

/// Error type shared by all core operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition of an operation was violated.
    Contract(&'static str),
    /// Numerical failure (singular system, non-finite result).
    Numerical(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
