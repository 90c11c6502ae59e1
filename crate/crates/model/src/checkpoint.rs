//! Checkpoint directories: weights, configuration and vocabulary.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::model::{dtype_of, EventStoryModel};
use crate::params::ParamStore;
use crate::vocab::Vocab;
use crate::ModelError;

pub const WEIGHTS_FILE: &str = "model.safetensors";
pub const CONFIG_FILE: &str = "model.json";
pub const VOCAB_FILE: &str = "vocab.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub config: ModelConfig,
    pub crate_version: String,
    /// Longest training target, used for the default generation budget.
    pub max_train_target: Option<usize>,
    /// Epoch (1-based) and dev loss the weights were selected at.
    pub epoch: Option<usize>,
    pub dev_loss: Option<f64>,
}

fn io_err(path: &Path, e: impl ToString) -> ModelError {
    ModelError::Checkpoint {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn save_checkpoint(dir: &Path, model: &EventStoryModel, meta: &CheckpointMeta) -> Result<(), ModelError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    model.params.save(&dir.join(WEIGHTS_FILE))?;
    let cfg = serde_json::to_string_pretty(meta).map_err(|e| io_err(dir, e))?;
    fs::write(dir.join(CONFIG_FILE), cfg + "\n").map_err(|e| io_err(dir, e))?;
    let vocab = serde_json::to_string(&model.vocab).map_err(|e| io_err(dir, e))?;
    fs::write(dir.join(VOCAB_FILE), vocab + "\n").map_err(|e| io_err(dir, e))?;
    Ok(())
}

pub fn load_meta(dir: &Path) -> Result<CheckpointMeta, ModelError> {
    let path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(&path, e))
}

pub fn load_vocab(dir: &Path) -> Result<Vocab, ModelError> {
    let path = dir.join(VOCAB_FILE);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(&path, e))
}

pub fn load_checkpoint(dir: &Path) -> Result<(EventStoryModel, CheckpointMeta), ModelError> {
    let meta = load_meta(dir)?;
    let vocab = load_vocab(dir)?;
    let params = ParamStore::load(
        &dir.join(WEIGHTS_FILE),
        meta.config.seed,
        dtype_of(meta.config.precision),
        candle_core::Device::Cpu,
    )?;
    let model = EventStoryModel::from_params(meta.config.clone(), vocab, params)?;
    Ok((model, meta))
}
