//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the analytic kernels, validators, and the CLI layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input outside a function's domain or a violated type invariant.
    Domain(String),
    /// A series, continued fraction, bisection, or quadrature did not
    /// converge within its iteration budget.
    Convergence(String),
    /// An internal numeric invariant failed (e.g. a negative discriminant
    /// that valid inputs cannot produce, or a singular normal-equation
    /// system that survived regularization).
    Numeric(String),
    /// Malformed configuration file or inconsistent experiment settings.
    Config(String),
    /// Output/file I/O failure in the CLI layer.
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Convergence(m) => write!(f, "convergence error: {m}"),
            Error::Numeric(m) => write!(f, "numeric error: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
