use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("contract: {0}")]
    Contract(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
