use thiserror::Error;

/// Failures of one bench invocation, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error(transparent)]
    Engine(#[from] pimhe::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl BenchError {
    pub fn usage(field: &str, msg: impl std::fmt::Display) -> Self {
        Self::Usage(format!("{field}: {msg}"))
    }

    /// 2 usage, 3 oracle mismatch, 4 overflow or depth, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        use pimhe::Error as E;
        match self {
            Self::Usage(_) => 2,
            Self::OracleMismatch(_) => 3,
            Self::Engine(E::Overflow(_) | E::Depth(_) | E::NoiseExhausted(_)) => 4,
            Self::Engine(
                E::Parameter(_)
                | E::Config(_)
                | E::Dataset(_)
                | E::UnknownKernel(_)
                | E::Capacity(_),
            ) => 2,
            Self::Engine(_) | Self::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
