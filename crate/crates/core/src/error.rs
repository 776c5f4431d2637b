use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes; the CLI maps each to a distinct exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Resource,
    NumericDomain,
    Unsolvable,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("kraft inequality violated up to length {length}")]
    KraftViolation { length: u64 },
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("numeric domain error: {0}")]
    Domain(String),
    #[error("divergent or unbounded tail: {0}")]
    DivergentTail(String),
    #[error("unsolvable: {0}")]
    Unsolvable(String),
    #[error("index gap: expected record {expected}, got {got}")]
    IndexGap { expected: u64, got: u64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidMachine(_)
            | Error::InvalidArgument(_)
            | Error::KraftViolation { .. }
            | Error::Checkpoint(_)
            | Error::Json(_) => ErrorKind::Config,
            Error::ResourceLimit(_) => ErrorKind::Resource,
            Error::Domain(_) | Error::DivergentTail(_) | Error::IndexGap { .. } => {
                ErrorKind::NumericDomain
            }
            Error::Unsolvable(_) => ErrorKind::Unsolvable,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
