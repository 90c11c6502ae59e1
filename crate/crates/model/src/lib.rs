//! Event-conditioned story generation: a context encoder and an event
//! encoder whose features are fused by cross-attention before decoding.

pub mod batch;
pub mod checkpoint;
pub mod config;
pub mod fusion;
pub mod generate;
pub mod layers;
pub mod loss;
pub mod model;
pub mod params;
pub mod similarity;
pub mod train;
pub mod vocab;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

use thiserror::Error;

pub use batch::{Batch, Example, InputLayout};
pub use config::{Ablations, GenerationConfig, ModelConfig, Precision, SentLossForm, TrainConfig};
pub use model::{EventStoryModel, ForwardOutput};
pub use vocab::Vocab;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("vocabulary error: {0}")]
    Vocab(String),
    #[error("missing parameter {0}")]
    MissingParameter(String),
    #[error("incompatible weights: {0}")]
    Incompatible(String),
    #[error("target sequence is empty")]
    EmptyTarget,
    #[error("batch is empty")]
    EmptyBatch,
    #[error("training diverged at step {step}: {what} is {value}")]
    Divergence { step: usize, what: &'static str, value: f64 },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Tensor(#[from] candle_core::Error),
    #[error(transparent)]
    Corpus(#[from] eventstory_core::corpus::CorpusError),
}
