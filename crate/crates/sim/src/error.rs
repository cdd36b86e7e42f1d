use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] otfs_radar::Error),

    #[error("could not draw a distinct-rows scenario in {attempts} attempts")]
    RetryExhausted { attempts: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type SimResult<T> = std::result::Result<T, SimError>;
