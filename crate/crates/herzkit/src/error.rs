use thiserror::Error;

/// Failure categories shared by every operation in the crate.
///
/// The category names are stable; the CLI maps them to exit statuses and
/// prints them in machine-readable error reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input domain error: {0}")]
    Domain(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("precondition error: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Capability(_) => "capability",
            Error::Range(_) => "range",
            Error::Shape(_) => "shape",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
