use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension {dim} exceeds the cap {cap} ({context})")]
    CapExceeded {
        dim: usize,
        cap: usize,
        context: String,
    },

    #[error("computation failed: {0}")]
    Compute(#[from] bbtherm::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::CapExceeded { .. } => 3,
            CliError::Compute(bbtherm::Error::DimensionCap { .. }) => 3,
            _ => 1,
        }
    }

    /// Maps a library cap violation onto [`CliError::CapExceeded`].
    pub fn from_compute(err: bbtherm::Error, context: &str) -> Self {
        match err {
            bbtherm::Error::DimensionCap { dim, cap } => CliError::CapExceeded {
                dim,
                cap,
                context: context.to_string(),
            },
            other => CliError::Compute(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
