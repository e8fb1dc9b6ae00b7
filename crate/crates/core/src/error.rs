use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates the precondition of the operation it was passed to.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain on which the function is defined.
    #[error("domain violation: {0}")]
    Domain(String),

    /// An iterative or adaptive procedure hit its cap without meeting the tolerance.
    #[error("no convergence in {what}: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    /// The parameters make a recursion identity singular.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A grid search had nothing to search after the admissibility filter.
    #[error("empty admissible set: {0}")]
    EmptyAdmissibleSet(String),

    #[error("export failed: {0}")]
    Export(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::NonFinite(_))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Export(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Export(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Export(e.to_string())
    }
}
