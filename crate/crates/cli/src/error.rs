use std::path::PathBuf;

use eventstory_core::corpus::CorpusError;
use eventstory_core::events::ExtractError;
use eventstory_core::metrics::MetricsError;
use eventstory_model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("invalid input {}: {message}", path.display())]
    InvalidInput { path: PathBuf, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl CliError {
    /// 1: bad or missing input, 3: configuration, 4: model or metric
    /// failure, 5: output could not be written. Usage errors exit with 2
    /// from the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingInput(_) | CliError::InvalidInput { .. } | CliError::Corpus(_) | CliError::Extract(_) => 1,
            CliError::Config(_) => 3,
            CliError::Model(ModelError::Config(_)) => 3,
            CliError::Metrics(_) | CliError::Model(_) => 4,
            CliError::Output { .. } => 5,
        }
    }

    pub fn output(path: &std::path::Path, e: impl ToString) -> Self {
        CliError::Output {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

/// Fail early, naming the path, when an input does not exist.
pub fn require(path: &std::path::Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingInput(path.to_path_buf()))
    }
}
