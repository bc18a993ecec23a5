use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] loglp_core::Error),

    #[error("band [{lo}, {hi}] is not usable: {reason}")]
    Band { lo: i32, hi: i32, reason: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("experiment {0} has no cells to work with")]
    EmptyCover(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
