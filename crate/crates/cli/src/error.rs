use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration could not be read, parsed or validated.
    #[error("config error: {0}")]
    Config(String),
    #[error("run failed: {0}")]
    Run(#[from] rsma_core::CoreError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code: 1 for configuration problems, 2 for failed runs.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            _ => 2,
        }
    }
}
