//! Optimization loop, dev-loss checkpoint selection and the two-stage warm
//! start of the event encoder.

use candle_core::Tensor;
use candle_nn::{AdamW, Optimizer, ParamsAdamW};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::batch::{Batch, Example, InputLayout};
use crate::config::{LrSchedule, ModelConfig, TrainConfig};
use crate::loss::{lm_loss, lm_loss_sum, overall_loss, sent_loss};
use crate::model::EventStoryModel;
use crate::ModelError;

/// Scalar losses of one batch, still attached to the graph.
#[derive(Debug)]
pub struct BatchLosses {
    pub lm: Tensor,
    pub sent: Option<Tensor>,
    pub overall: Tensor,
}

/// Sentence loss averaged over the examples that have both a prediction
/// and a target of the same size.
fn batch_sent_loss(
    model: &EventStoryModel,
    predictions: &[Option<Tensor>],
    batch: &Batch,
    cfg: &TrainConfig,
) -> Result<Option<Tensor>, ModelError> {
    if !model.config.uses_similarity() {
        return Ok(None);
    }
    let mut terms = Vec::new();
    for (pred, target) in predictions.iter().zip(&batch.sim_targets) {
        if let (Some(p), Some(t)) = (pred, target) {
            if p.dims() == t.dims() {
                terms.push(sent_loss(t, p, cfg.delta, cfg.sent_loss)?);
            } else {
                log::debug!("similarity target {:?} does not match {:?}; skipped", t.dims(), p.dims());
            }
        }
    }
    if terms.is_empty() {
        return Ok(None);
    }
    let n = terms.len() as f64;
    Ok(Some((Tensor::stack(&terms, 0)?.sum_all()? / n)?))
}

pub fn batch_losses(model: &EventStoryModel, batch: &Batch, cfg: &TrainConfig) -> Result<BatchLosses, ModelError> {
    let out = model.forward(batch)?;
    let lm = lm_loss(&out.logits, &batch.targets, &batch.target_mask)?;
    let sent = batch_sent_loss(model, &out.similarity, batch, cfg)?;
    let overall = overall_loss(&lm, sent.as_ref(), cfg.lambda)?;
    Ok(BatchLosses { lm, sent, overall })
}

fn scalar(t: &Tensor) -> Result<f64, ModelError> {
    Ok(t.to_dtype(candle_core::DType::F64)?.to_scalar::<f64>()?)
}

/// Losses over a whole split. `lm` is the token-level mean NLL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitLoss {
    pub lm: f64,
    pub sent: Option<f64>,
    pub overall: f64,
    pub nll_sum: f64,
    pub tokens: usize,
}

impl SplitLoss {
    pub fn perplexity(&self) -> f64 {
        (self.nll_sum / self.tokens as f64).exp()
    }
}

pub fn evaluate_loss(
    model: &EventStoryModel,
    examples: &[Example],
    cfg: &TrainConfig,
    layout: InputLayout,
) -> Result<SplitLoss, ModelError> {
    if examples.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    let mut nll_sum = 0.0;
    let mut tokens = 0.0;
    let mut sent_sum = 0.0;
    let mut sent_n = 0usize;
    for chunk in examples.chunks(cfg.batch_size) {
        let refs: Vec<&Example> = chunk.iter().collect();
        let batch = Batch::new(&refs, layout, &model.vocab, model.dtype(), model.device())?;
        let out = model.forward(&batch)?;
        let (sum, count) = lm_loss_sum(&out.logits, &batch.targets, &batch.target_mask)?;
        nll_sum += scalar(&sum)?;
        tokens += count;
        if let Some(s) = batch_sent_loss(model, &out.similarity, &batch, cfg)? {
            let k = out.similarity.iter().filter(|p| p.is_some()).count().max(1);
            sent_sum += scalar(&s)? * k as f64;
            sent_n += k;
        }
    }
    if tokens == 0.0 {
        return Err(ModelError::EmptyTarget);
    }
    let lm = nll_sum / tokens;
    let sent = (sent_n > 0).then(|| sent_sum / sent_n as f64);
    Ok(SplitLoss {
        lm,
        sent,
        overall: lm + cfg.lambda * sent.unwrap_or(0.0),
        nll_sum,
        tokens: tokens as usize,
    })
}

/// Index of the lowest finite dev loss; the earliest wins ties.
pub fn select_best(dev_losses: &[f64]) -> Option<usize> {
    dev_losses
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub epoch: usize,
    pub lm_loss: f64,
    pub sent_loss: Option<f64>,
    pub overall: f64,
    /// Filled on the last step of each epoch when a dev split exists.
    pub dev_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub records: Vec<StepRecord>,
    pub dev_losses: Vec<f64>,
    /// 0-based epoch whose weights were kept.
    pub best_epoch: Option<usize>,
    pub steps: usize,
}

fn learning_rate(cfg: &TrainConfig, step: usize, total: usize) -> f64 {
    match cfg.schedule {
        LrSchedule::Constant => cfg.learning_rate,
        LrSchedule::Linear => cfg.learning_rate * (1.0 - step as f64 / total.max(1) as f64).max(0.0),
    }
}

/// Train in place. When `dev` is non-empty the weights of the epoch with
/// the lowest dev loss are restored at the end.
pub fn train(
    model: &EventStoryModel,
    train_set: &[Example],
    dev: &[Example],
    cfg: &TrainConfig,
    layout: InputLayout,
    mut on_step: impl FnMut(&StepRecord),
) -> Result<TrainReport, ModelError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    let params = ParamsAdamW {
        lr: cfg.learning_rate,
        beta1: 0.9,
        beta2: 0.999,
        eps: cfg.adam_eps,
        weight_decay: cfg.weight_decay,
    };
    let mut opt = AdamW::new(model.params.trainable(&[]), params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let per_epoch = train_set.len().div_ceil(cfg.batch_size);
    // A step cap overrides the epoch count.
    let total = cfg.max_steps.unwrap_or(per_epoch * cfg.epochs);
    let epochs = total.div_ceil(per_epoch);

    let mut records = Vec::new();
    let mut dev_losses = Vec::new();
    let mut best: Option<(usize, f64, std::collections::BTreeMap<String, Tensor>)> = None;
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    'epochs: for epoch in 0..epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            if step >= total {
                break 'epochs;
            }
            let refs: Vec<&Example> = chunk.iter().map(|&i| &train_set[i]).collect();
            let batch = Batch::new(&refs, layout, &model.vocab, model.dtype(), model.device())?;
            let losses = batch_losses(model, &batch, cfg)?;
            let overall = scalar(&losses.overall)?;
            let lm = scalar(&losses.lm)?;
            if !overall.is_finite() {
                return Err(ModelError::Divergence {
                    step,
                    what: "overall loss",
                    value: overall,
                });
            }
            opt.set_learning_rate(learning_rate(cfg, step, total));
            let grads = losses.overall.backward()?;
            opt.step(&grads)?;
            step += 1;
            let last_of_epoch = b + 1 == per_epoch || step >= total;
            let mut rec = StepRecord {
                step,
                epoch: epoch + 1,
                lm_loss: lm,
                sent_loss: losses.sent.as_ref().map(scalar).transpose()?,
                overall,
                dev_loss: None,
            };
            if last_of_epoch && !dev.is_empty() {
                let d = evaluate_loss(model, dev, cfg, layout)?.overall;
                rec.dev_loss = Some(d);
                dev_losses.push(d);
                if best.as_ref().is_none_or(|(_, v, _)| d < *v) {
                    best = Some((epoch, d, model.params.snapshot()?));
                }
            }
            if cfg.log_every > 0 && step % cfg.log_every == 0 {
                log::info!(
                    "step {step} epoch {} lm {lm:.4} overall {overall:.4}{}",
                    epoch + 1,
                    rec.dev_loss.map(|d| format!(" dev {d:.4}")).unwrap_or_default()
                );
            }
            on_step(&rec);
            records.push(rec);
        }
    }
    let best_epoch = match best {
        Some((e, _, snap)) => {
            model.params.restore(&snap)?;
            Some(e)
        }
        None => None,
    };
    Ok(TrainReport {
        records,
        dev_losses,
        best_epoch,
        steps: step,
    })
}

/// Configuration of the single-encoder first stage: one encoder reading
/// the context followed by the events, no fusion and no similarity head.
pub fn stage_one_config(config: &ModelConfig) -> ModelConfig {
    let mut c = config.clone();
    c.ablations.disable_leading = true;
    c.ablations.disable_events = false;
    c.ablations.disable_cm = true;
    c.ablations.disable_sen = true;
    c
}

/// Copy a trained first stage into `base`, a freshly initialized full
/// model: the first-stage encoder becomes the event encoder; embeddings,
/// decoder and output head carry over; the context encoder, fusion and
/// similarity head keep the base weights.
pub fn transfer_stage_one(stage_one: &EventStoryModel, base: EventStoryModel) -> Result<EventStoryModel, ModelError> {
    if !base.config.uses_events() {
        return Err(ModelError::Config("warm start needs the event encoder".into()));
    }
    if stage_one.vocab != base.vocab {
        return Err(ModelError::Incompatible(format!(
            "first-stage vocabulary of {} tokens differs from the target vocabulary of {}",
            stage_one.vocab.len(),
            base.vocab.len()
        )));
    }
    let a = &stage_one.config;
    let b = &base.config;
    if (a.model_dim, a.num_layers, a.num_heads, a.max_source_length, a.max_target_length)
        != (b.model_dim, b.num_layers, b.num_heads, b.max_source_length, b.max_target_length)
    {
        return Err(ModelError::Incompatible("first-stage architecture differs from the target model".into()));
    }
    for name in stage_one.params.names() {
        if !base.params.contains(name) {
            return Err(ModelError::Incompatible(format!("no slot for first-stage parameter {name}")));
        }
        base.params.set(name, &stage_one.params.get(name)?.detach())?;
    }
    Ok(base)
}

/// Both stages: train the single-encoder model on the concatenated input
/// for `warm_start_epochs`, then transfer into a fresh full model.
pub fn warm_start(
    config: &ModelConfig,
    vocab: crate::Vocab,
    train_set: &[Example],
    dev: &[Example],
    cfg: &TrainConfig,
) -> Result<(EventStoryModel, TrainReport), ModelError> {
    let stage_one = EventStoryModel::new(stage_one_config(config), vocab.clone())?;
    let stage_cfg = TrainConfig {
        epochs: cfg.warm_start_epochs.max(1),
        max_steps: None,
        ..cfg.clone()
    };
    let report = train(&stage_one, train_set, dev, &stage_cfg, InputLayout::Concatenated, |_| {})?;
    let base = EventStoryModel::new(config.clone(), vocab)?;
    Ok((transfer_stage_one(&stage_one, base)?, report))
}
