use std::path::PathBuf;

/// Errors raised by the simulator and its verification harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid scenario or configuration input.
    #[error("configuration error: {0}")]
    Config(String),

    /// Located configuration diagnostic (file line and key path).
    #[error("{path}:{line}: {key}: {message}")]
    ConfigAt {
        path: String,
        line: usize,
        key: String,
        message: String,
    },

    /// Non-finite value produced during force assembly.
    #[error("non-finite force at node {node}")]
    NonFiniteForce { node: usize },

    /// Non-finite state produced while time stepping.
    #[error("non-finite state at step {step} (node {node})")]
    NonFiniteState { step: usize, node: usize },

    /// Requested configuration is outside what the implementation supports.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A verification property did not hold.
    #[error("property violation: {0}")]
    PropertyViolation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::ConfigAt { .. }
            | Error::Unsupported(_)
            | Error::Io { .. } => 2,
            Error::Domain(_) | Error::NonFiniteForce { .. } | Error::NonFiniteState { .. } => 3,
            Error::PropertyViolation(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
