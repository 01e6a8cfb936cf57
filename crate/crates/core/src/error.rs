use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("no feasible root: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag used on the CLI error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config { .. } => "CONFIG",
            Error::Numerical(_) => "NUMERICAL",
            Error::Unsupported(_) => "UNSUPPORTED",
            Error::Resource(_) => "RESOURCE",
            Error::Infeasible(_) => "INFEASIBLE",
            Error::Io(_) => "IO",
        }
    }

    /// Process exit status: 2 config, 3 numerical, 4 unsupported.
    pub fn exit_status(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Io(_) => 2,
            Error::Numerical(_) | Error::Resource(_) | Error::Infeasible(_) => 3,
            Error::Unsupported(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
