//! Crate-wide error type.

/// Errors reported by the toolkit, grouped by the failure class the CLI
/// maps to distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside a model's mathematical domain (distance below the 1 m
    /// anchor, grazing angle, degenerate regression design, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or out-of-range configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input data (CSV schema violations, rejected-row overflow).
    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
