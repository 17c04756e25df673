use thiserror::Error;

/// Errors raised by the numeric toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric procedure failed to converge or lost precision.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A configured work budget would be exceeded.
    #[error("resource error: {what} would exceed the {budget} budget of {limit}")]
    Resource {
        what: String,
        budget: &'static str,
        limit: u64,
    },

    /// An exact value was combined with a floating one.
    #[error("mixed exact/float arithmetic: {0}")]
    MixedMode(String),

    /// A structural audit failed. Always a bug.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, budget: &'static str, limit: u64) -> Self {
        Error::Resource {
            what: what.into(),
            budget,
            limit,
        }
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Numeric(_) => "numeric",
            Error::Resource { .. } => "resource",
            Error::MixedMode(_) => "mixed_mode",
            Error::Consistency(_) => "consistency",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
