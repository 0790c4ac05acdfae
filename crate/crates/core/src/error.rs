use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid game definition: {0}")]
    Validation(String),

    #[error("environment is done; reset before stepping")]
    EnvDone,

    #[error("snapshot belongs to game {snapshot:016x}, environment runs {env:016x}")]
    SnapshotMismatch { snapshot: u64, env: u64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite loss: {0}")]
    NonFinite(String),

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
