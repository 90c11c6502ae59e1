//! Model, training and generation settings.

use serde::{Deserialize, Serialize};

use crate::ModelError;

/// Switches that remove parts of the architecture.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ablations {
    /// Skip the contextualizing module; the decoder memory is the plain
    /// concatenation of context and event features.
    pub disable_cm: bool,
    /// No similarity head and no sentence loss.
    pub disable_sen: bool,
    /// Drop the context encoder; the memory holds event features only.
    pub disable_leading: bool,
    /// Drop the event encoder; the memory holds context features only.
    pub disable_events: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub num_layers: usize,
    pub num_heads: usize,
    pub model_dim: usize,
    /// Filled from the vocabulary when the model is built.
    pub vocab_size: usize,
    /// Scale of the residual context mapping.
    pub beta: f64,
    pub trainable_beta: bool,
    pub ablations: Ablations,
    /// Budget shared by context and event inputs.
    pub max_source_length: usize,
    pub max_target_length: usize,
    pub precision: Precision,
    /// Standard deviation of the normal weight init.
    pub init_std: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            num_layers: 6,
            num_heads: 12,
            model_dim: 768,
            vocab_size: 0,
            beta: 0.1,
            trainable_beta: false,
            ablations: Ablations::default(),
            max_source_length: 1024,
            max_target_length: 1024,
            precision: Precision::F32,
            init_std: 0.02,
            seed: 42,
        }
    }
}

impl ModelConfig {
    /// Small configuration for desk-scale runs.
    pub fn toy() -> Self {
        ModelConfig {
            num_layers: 2,
            num_heads: 2,
            model_dim: 64,
            max_source_length: 256,
            max_target_length: 256,
            ..ModelConfig::default()
        }
    }

    pub fn head_dim(&self) -> usize {
        self.model_dim / self.num_heads.max(1)
    }

    pub fn ffn_dim(&self) -> usize {
        4 * self.model_dim
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.num_heads == 0 || self.model_dim == 0 || self.num_layers == 0 {
            return bad("num_layers, num_heads and model_dim must be positive");
        }
        if self.model_dim % self.num_heads != 0 {
            return bad("model_dim must be divisible by num_heads");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be finite and non-negative");
        }
        if self.ablations.disable_leading && self.ablations.disable_events {
            return bad("disable_leading and disable_events leave the decoder without input");
        }
        if self.max_source_length < 2 || self.max_target_length < 2 {
            return bad("sequence length limits must be at least 2");
        }
        if self.vocab_size < crate::vocab::special_tokens().len() {
            return bad("vocab_size does not cover the special tokens");
        }
        Ok(())
    }

    pub fn uses_context(&self) -> bool {
        !self.ablations.disable_leading
    }

    pub fn uses_events(&self) -> bool {
        !self.ablations.disable_events
    }

    /// The cross-attention fusion only exists when both encoders do.
    pub fn uses_fusion(&self) -> bool {
        self.uses_context() && self.uses_events() && !self.ablations.disable_cm
    }

    pub fn uses_similarity(&self) -> bool {
        !self.ablations.disable_sen
    }
}

/// How cells of the similarity loss are bounded by the margin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentLossForm {
    /// max(|target - prediction|, margin): each cell floored at the margin.
    #[default]
    Floor,
    /// max(|target - prediction| - margin, 0).
    Hinge,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LrSchedule {
    #[default]
    Constant,
    /// Linear decay to zero over the run.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    /// Stop after this many optimizer steps when set.
    pub max_steps: Option<usize>,
    /// Weight of the sentence-similarity loss.
    pub lambda: f64,
    /// Margin of the sentence-similarity loss.
    pub delta: f64,
    pub sent_loss: SentLossForm,
    pub schedule: LrSchedule,
    pub seed: u64,
    /// Shuffle training examples every epoch.
    pub shuffle: bool,
    /// Epochs of the single-encoder stage used to warm-start the event
    /// encoder; 0 disables the warm start.
    pub warm_start_epochs: usize,
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 64,
            learning_rate: 8e-5,
            adam_eps: 1e-8,
            weight_decay: 0.0,
            epochs: 5,
            max_steps: None,
            lambda: 0.1,
            delta: 0.1,
            sent_loss: SentLossForm::Floor,
            schedule: LrSchedule::Constant,
            seed: 42,
            shuffle: true,
            warm_start_epochs: 1,
            log_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be positive");
        }
        if !(self.learning_rate > 0.0 && self.adam_eps > 0.0) {
            return bad("learning_rate and adam_eps must be positive");
        }
        if !(0.0..=1.0).contains(&self.lambda) || !(0.0..=1.0).contains(&self.delta) {
            return bad("lambda and delta must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub nucleus_p: f64,
    /// Defaults to 1.2 times the longest training target when unset.
    pub max_new_tokens: Option<usize>,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            nucleus_p: 0.9,
            max_new_tokens: None,
            batch_size: 15,
            seed: 42,
        }
    }
}

impl GenerationConfig {
    /// A nucleus so small it always holds just the most likely token.
    pub fn greedy() -> Self {
        GenerationConfig {
            nucleus_p: f64::MIN_POSITIVE,
            ..GenerationConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.nucleus_p > 0.0 && self.nucleus_p <= 1.0) {
            return Err(ModelError::Config("nucleus_p must lie in (0, 1]".into()));
        }
        if self.max_new_tokens == Some(0) || self.batch_size == 0 {
            return Err(ModelError::Config("max_new_tokens and batch_size must be positive".into()));
        }
        Ok(())
    }
}
