use thiserror::Error;

pub type Result<T> = std::result::Result<T, ScreenError>;

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate evaluation: {0}")]
    DegenerateEvaluation(String),

    #[error("singular spline design for {target}: {detail} (try a smaller basis dimension)")]
    SingularDesign { target: String, detail: String },

    #[error("point {z} lies outside the spline support [{lower}, {upper}]")]
    OutOfSupport { z: f64, lower: f64, upper: f64 },

    #[error("harness failure: {0}")]
    Harness(String),

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ScreenError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ScreenError::InvalidInput(msg.into())
    }
}
