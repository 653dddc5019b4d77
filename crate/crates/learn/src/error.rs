use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("target is constant")]
    ConstantTarget,
    #[error("only one class present")]
    SingleClass,
    #[error("too few rows: need {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("row is missing feature {0}")]
    MissingFeature(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
