use serde_json::{json, Value};

pub type LabResult<T> = Result<T, LabError>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] silt_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    /// 2 for bad input, 3 for numerical failure, 1 for output failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Core(e) if e.is_numerical() => 3,
            LabError::Core(_) => 2,
            LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::Core(e) if e.is_numerical() => "numerical",
            LabError::Core(_) => "invalid_parameter",
            LabError::Io(_) => "io",
            LabError::Csv(_) => "csv",
            LabError::Json(_) => "json",
        }
    }

    /// One-line machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
    }
}
