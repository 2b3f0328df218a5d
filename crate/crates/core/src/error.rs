use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in `{name}`: {detail}")]
    Domain { name: &'static str, detail: String },

    /// A computed quantity violated an internal consistency check
    /// (negative discriminant, unphysical symplectic eigenvalue, ...).
    #[error("numerical consistency error: {0}")]
    Numerical(String),

    /// A required precondition (such as a valid security budget) does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("configuration error on `{key}`: {detail}")]
    Config { key: String, detail: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            name,
            detail: detail.into(),
        }
    }

    pub(crate) fn numerical(detail: impl Into<String>) -> Self {
        Error::Numerical(detail.into())
    }

    pub(crate) fn config(key: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            detail: detail.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Config { .. } | Error::Io(_) => 3,
            Error::Domain { .. } | Error::Numerical(_) | Error::Precondition(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
