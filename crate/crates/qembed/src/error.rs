use thiserror::Error;

#[derive(Debug, Error)]
pub enum QembedError {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Mismatched dimensions between arguments.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// File-system or serialization failure, with path context.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, QembedError>;
