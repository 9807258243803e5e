use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension n = {n}: {reason}")]
    UnsupportedDimension { n: usize, reason: String },

    #[error("construction failed at stage `{stage}`: {detail}")]
    Construction { stage: String, detail: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("planar geometry: {0}")]
    Planar(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn construction(stage: &str, detail: impl Into<String>) -> Self {
        Error::Construction {
            stage: stage.to_string(),
            detail: detail.into(),
        }
    }
}
