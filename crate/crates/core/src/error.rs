use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("oracle did not stabilize: {0}")]
    Unstable(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
