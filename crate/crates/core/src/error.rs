use thiserror::Error;

/// Failure modes shared across the library. Each variant maps onto one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input to {op}: {detail}")]
    Invalid { op: &'static str, detail: String },
    #[error("numerical convergence failure in {op}: {detail}")]
    Convergence { op: &'static str, detail: String },
    #[error("invariant violated in {op}: {detail}")]
    Invariant { op: &'static str, detail: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid { op, detail: detail.into() }
    }

    pub fn convergence(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Convergence { op, detail: detail.into() }
    }

    pub fn invariant(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant { op, detail: detail.into() }
    }

    /// Process exit status used by the command line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid { .. } | Error::Config(_) | Error::Io(_) => 2,
            Error::Convergence { .. } => 3,
            Error::Invariant { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
