use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("width mismatch: {left} limbs vs {right} limbs")]
    WidthMismatch { left: usize, right: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("multiplicative depth exceeded: {0}")]
    Depth(String),
    #[error("plaintext overflow: {0}")]
    Overflow(String),
    #[error("noise budget exhausted: {0}")]
    NoiseExhausted(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("PIM memory capacity exceeded: {0}")]
    Capacity(String),
    #[error("unknown kernel kind `{0}`")]
    UnknownKernel(String),
    #[error("malformed encoding: {0}")]
    Decode(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("dataset: {0}")]
    Dataset(String),
}

pub type Result<T> = std::result::Result<T, Error>;
