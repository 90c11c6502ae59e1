//! The dual-encoder generator: context and event encoders, fusion, decoder,
//! language-model head and the similarity head.

use candle_core::{DType, Device, Tensor};

use crate::batch::Batch;
use crate::config::{ModelConfig, Precision};
use crate::fusion::{fuse, ContextualizingModule, FusionBundle};
use crate::layers::{padding_bias, Decoder, Encoder, Linear};
use crate::params::{Init, ParamStore};
use crate::similarity::SimilarityHead;
use crate::vocab::Vocab;
use crate::ModelError;

pub const EMBED_PARAM: &str = "embed.tokens";

#[derive(Debug)]
pub struct ForwardOutput {
    /// `(batch, time, vocab)`.
    pub logits: Tensor,
    /// Top decoder layer, `(batch, time, width)`.
    pub hidden: Tensor,
    pub fusion: FusionBundle,
    /// Per example, the `(m, m)` similarity prediction when the head is on
    /// and the example has at least two separators.
    pub similarity: Vec<Option<Tensor>>,
}

/// Encoder memory ready for repeated decoding.
#[derive(Debug, Clone)]
pub struct Memory {
    pub features: Tensor,
    pub bias: Tensor,
}

#[derive(Debug)]
pub struct EventStoryModel {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: ParamStore,
    embed: Tensor,
    encoder_c: Option<Encoder>,
    encoder_e: Option<Encoder>,
    fusion: Option<ContextualizingModule>,
    decoder: Decoder,
    lm_head: Linear,
    similarity: Option<SimilarityHead>,
}

pub fn dtype_of(p: Precision) -> DType {
    match p {
        Precision::F32 => DType::F32,
        Precision::F64 => DType::F64,
    }
}

impl EventStoryModel {
    /// Fresh weights from the configured seed.
    pub fn new(mut config: ModelConfig, vocab: Vocab) -> Result<Self, ModelError> {
        config.vocab_size = vocab.len();
        let store = ParamStore::new(config.seed, dtype_of(config.precision), Device::Cpu);
        Self::assemble(config, vocab, store, true)
    }

    /// Wrap existing weights. Every parameter the configuration needs must
    /// be present, and nothing else may be.
    pub fn from_params(mut config: ModelConfig, vocab: Vocab, params: ParamStore) -> Result<Self, ModelError> {
        if config.vocab_size != 0 && config.vocab_size != vocab.len() {
            return Err(ModelError::Incompatible(format!(
                "config vocab size {} vs vocabulary of {}",
                config.vocab_size,
                vocab.len()
            )));
        }
        config.vocab_size = vocab.len();
        Self::assemble(config, vocab, params, false)
    }

    fn assemble(config: ModelConfig, vocab: Vocab, mut store: ParamStore, fresh: bool) -> Result<Self, ModelError> {
        config.validate()?;
        let before: Vec<String> = store.names().map(String::from).collect();
        let d = config.model_dim;
        let h = config.num_heads;
        let std = config.init_std;
        let embed = store.get_or_init(EMBED_PARAM, &[config.vocab_size, d], Init::Normal(std))?;
        let enc = |store: &mut ParamStore, name: &str| {
            Encoder::new(store, name, d, h, config.num_layers, config.max_source_length, std)
        };
        let encoder_c = if config.uses_context() { Some(enc(&mut store, "encoder_c")?) } else { None };
        let encoder_e = if config.uses_events() { Some(enc(&mut store, "encoder_e")?) } else { None };
        let fusion = if config.uses_fusion() {
            Some(ContextualizingModule::new(&mut store, d, h, config.beta, config.trainable_beta, std)?)
        } else {
            None
        };
        let decoder = Decoder::new(&mut store, "decoder", d, h, config.num_layers, config.max_target_length, std)?;
        let lm_head = Linear::new(&mut store, "lm_head", d, config.vocab_size, false, std)?;
        // Built last; initialization is keyed by name, so its presence does
        // not perturb any other weight.
        let similarity = if config.uses_similarity() {
            Some(SimilarityHead::new(&mut store, d, std)?)
        } else {
            None
        };
        if !fresh {
            let after: Vec<String> = store.names().map(String::from).collect();
            if after.len() != before.len() {
                let missing: Vec<_> = after.iter().filter(|n| !before.contains(n)).cloned().collect();
                return Err(ModelError::Incompatible(format!(
                    "checkpoint lacks parameters for this configuration: {}",
                    missing.join(", ")
                )));
            }
            let extra = store.unrequested();
            if !extra.is_empty() {
                return Err(ModelError::Incompatible(format!(
                    "checkpoint has parameters this configuration does not use: {}",
                    extra.join(", ")
                )));
            }
        }
        Ok(EventStoryModel {
            config,
            vocab,
            params: store,
            embed,
            encoder_c,
            encoder_e,
            fusion,
            decoder,
            lm_head,
            similarity,
        })
    }

    pub fn dtype(&self) -> DType {
        self.params.dtype()
    }

    pub fn device(&self) -> &Device {
        self.params.device()
    }

    pub fn fusion_module(&self) -> Option<&ContextualizingModule> {
        self.fusion.as_ref()
    }

    fn embed_ids(&self, ids: &Tensor) -> Result<Tensor, ModelError> {
        let (b, t) = ids.dims2()?;
        let max = ids.flatten_all()?.max(0)?.to_scalar::<u32>()?;
        if max as usize >= self.config.vocab_size {
            return Err(ModelError::Input(format!("token id {max} outside vocabulary")));
        }
        Ok(self
            .embed
            .index_select(&ids.flatten_all()?, 0)?
            .reshape((b, t, self.config.model_dim))?)
    }

    fn check_length(&self, len: usize, limit: usize, what: &str) -> Result<(), ModelError> {
        if len > limit {
            return Err(ModelError::Input(format!("{what} length {len} exceeds the limit of {limit}")));
        }
        Ok(())
    }

    /// Context encoder features for padded ids.
    pub fn encode_context(&self, ids: &Tensor, lengths: &[usize]) -> Result<Tensor, ModelError> {
        let enc = self
            .encoder_c
            .as_ref()
            .ok_or_else(|| ModelError::Config("context encoder is disabled".into()))?;
        self.check_length(ids.dim(1)?, self.config.max_source_length, "context")?;
        let bias = padding_bias(lengths, ids.dim(1)?, self.dtype(), self.device())?;
        enc.forward(&self.embed_ids(ids)?, &bias)
    }

    pub fn encode_events(&self, ids: &Tensor, lengths: &[usize]) -> Result<Tensor, ModelError> {
        let enc = self
            .encoder_e
            .as_ref()
            .ok_or_else(|| ModelError::Config("event encoder is disabled".into()))?;
        self.check_length(ids.dim(1)?, self.config.max_source_length, "event")?;
        let bias = padding_bias(lengths, ids.dim(1)?, self.dtype(), self.device())?;
        enc.forward(&self.embed_ids(ids)?, &bias)
    }

    /// Run the encoders and build the decoder memory under the configured
    /// wiring.
    pub fn encode(&self, batch: &Batch) -> Result<(FusionBundle, Memory), ModelError> {
        let dt = self.dtype();
        let dev = self.device();
        let ctx = match (&batch.context, self.config.uses_context()) {
            (Some(ids), true) => Some((self.encode_context(ids, &batch.context_lengths)?, ids.dim(1)?)),
            (None, true) => {
                return Err(ModelError::Input("batch has no context but the model reads one".into()));
            }
            _ => None,
        };
        let ev = if self.config.uses_events() || ctx.is_none() {
            Some((self.encode_events(&batch.events, &batch.event_lengths)?, batch.events.dim(1)?))
        } else {
            None
        };
        let ctx_bias = |w| padding_bias(&batch.context_lengths, w, dt, dev);
        let ev_bias = |w| padding_bias(&batch.event_lengths, w, dt, dev);
        let (bundle, bias) = match (ctx, ev) {
            (Some((fc, wc)), Some((fe, we))) => {
                let cb = ctx_bias(wc)?;
                let eb = ev_bias(we)?;
                let (attended, contextualized, attention) = match &self.fusion {
                    Some(m) => {
                        let (fca, w) = m.cross_attend(&fe, &fc, &cb)?;
                        let fhe = m.contextualize(&fe, &fca)?;
                        (Some(fca), Some(fhe), Some(w))
                    }
                    None => (None, None, None),
                };
                let memory = fuse(&fc, contextualized.as_ref().unwrap_or(&fe))?;
                let bias = Tensor::cat(&[&cb, &eb], 3)?;
                (
                    FusionBundle {
                        context: Some(fc),
                        events: Some(fe),
                        attended,
                        contextualized,
                        memory,
                        attention,
                    },
                    bias,
                )
            }
            (Some((fc, wc)), None) => (
                FusionBundle {
                    context: Some(fc.clone()),
                    events: None,
                    attended: None,
                    contextualized: None,
                    memory: fc,
                    attention: None,
                },
                ctx_bias(wc)?,
            ),
            (None, Some((fe, we))) => (
                FusionBundle {
                    context: None,
                    events: Some(fe.clone()),
                    attended: None,
                    contextualized: None,
                    memory: fe,
                    attention: None,
                },
                ev_bias(we)?,
            ),
            (None, None) => return Err(ModelError::Config("no encoder input available".into())),
        };
        let memory = Memory {
            features: bundle.memory.clone(),
            bias,
        };
        Ok((bundle, memory))
    }

    /// Top decoder states for a prefix `(batch, time)` of ids.
    pub fn decode_hidden(&self, prefix: &Tensor, memory: &Memory) -> Result<Tensor, ModelError> {
        self.check_length(prefix.dim(1)?, self.config.max_target_length, "decoder input")?;
        self.decoder
            .forward(&self.embed_ids(prefix)?, &memory.features, &memory.bias)
    }

    pub fn logits(&self, hidden: &Tensor) -> Result<Tensor, ModelError> {
        self.lm_head.forward(hidden)
    }

    /// Next-token distribution after each prefix position.
    pub fn decode_step(&self, prefix: &Tensor, memory: &Memory) -> Result<Tensor, ModelError> {
        let hidden = self.decode_hidden(prefix, memory)?;
        let logits = self.logits(&hidden)?;
        crate::layers::softmax_last(&logits)
    }

    /// Similarity predictions from the states at each example's separators.
    pub fn predict_similarity(&self, hidden: &Tensor, separators: &[Vec<usize>]) -> Result<Vec<Option<Tensor>>, ModelError> {
        let Some(head) = &self.similarity else {
            return Ok(vec![None; separators.len()]);
        };
        let mut out = Vec::with_capacity(separators.len());
        for (b, seps) in separators.iter().enumerate() {
            if seps.len() < 2 {
                out.push(None);
                continue;
            }
            let idx: Vec<u32> = seps.iter().map(|&p| p as u32).collect();
            let idx = Tensor::new(idx.as_slice(), self.device())?;
            let states = hidden.get(b)?.index_select(&idx, 0)?;
            out.push(Some(head.predict(&states)?));
        }
        Ok(out)
    }

    pub fn forward(&self, batch: &Batch) -> Result<ForwardOutput, ModelError> {
        let (fusion, memory) = self.encode(batch)?;
        let hidden = self.decode_hidden(&batch.decoder_input, &memory)?;
        let logits = self.logits(&hidden)?;
        let similarity = self.predict_similarity(&hidden, &batch.separators)?;
        Ok(ForwardOutput {
            logits,
            hidden,
            fusion,
            similarity,
        })
    }

    pub fn similarity_head(&self) -> Option<&SimilarityHead> {
        self.similarity.as_ref()
    }
}
