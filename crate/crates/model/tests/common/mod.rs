#![allow(dead_code)]

use std::path::PathBuf;

use candle_core::{DType, Device, Tensor};
use eventstory_core::corpus::{preprocess_corpus, Dataset, NameLexicon, Split, StoryRecord};
use eventstory_core::events::{EventExtractor, EventRecord};
use eventstory_core::text::RuleSplitter;
use eventstory_model::batch::{build_vocab, prepare_examples};
use eventstory_model::similarity::HashedBagOfWords;
use eventstory_model::{Batch, EventStoryModel, Example, InputLayout, ModelConfig, Precision, Vocab};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/roc")
}

pub struct Fixture {
    pub vocab: Vocab,
    pub train: Vec<Example>,
    pub dev: Vec<Example>,
    pub stories: Vec<StoryRecord>,
    pub events: Vec<EventRecord>,
}

/// The bundled ROC-style fixture, preprocessed, event-annotated and in id
/// space, with hashed bag-of-words similarity targets.
pub fn fixture() -> Fixture {
    let out = preprocess_corpus(&fixture_dir(), Dataset::Roc, &NameLexicon::bundled(), &RuleSplitter).unwrap();
    let extractor = EventExtractor::default();
    let stories: Vec<StoryRecord> = out.records.clone();
    let events: Vec<EventRecord> = stories.iter().map(|s| extractor.extract_record(s).unwrap().0).collect();
    let vocab = build_vocab(&stories, &events, 1);
    let emb = HashedBagOfWords { dim: 64 };
    let pick = |split: Split| {
        let s: Vec<StoryRecord> = stories.iter().filter(|r| r.split == split).cloned().collect();
        prepare_examples(&s, &events, &vocab, Some(&emb), 256, 256).unwrap()
    };
    Fixture {
        train: pick(Split::Train),
        dev: pick(Split::Dev),
        vocab,
        stories,
        events,
    }
}

/// A small random configuration for property and gradient checks.
pub fn tiny(dim: usize, precision: Precision) -> ModelConfig {
    ModelConfig {
        num_layers: 2,
        num_heads: 2,
        model_dim: dim,
        max_source_length: 128,
        max_target_length: 128,
        precision,
        ..ModelConfig::default()
    }
}

/// Vocabulary over a handful of words, enough for synthetic examples.
pub fn word_vocab() -> Vocab {
    let words: Vec<String> = "a b c d e f g h i j k l".split(' ').map(String::from).collect();
    Vocab::build(&words, 1)
}

/// Deterministic synthetic example with the given lengths.
pub fn synthetic(vocab: &Vocab, id: usize, ctx: usize, ev: usize, sentences: usize) -> Example {
    let word = |k: usize| vocab.id(&((b'a' + (k % 12) as u8) as char).to_string());
    let context: Vec<u32> = (0..ctx).map(|k| word(k * 7 + id)).collect();
    let mut events = vec![vocab.id("<e_s>")];
    events.extend((0..ev.saturating_sub(2)).map(|k| word(k * 5 + id + 1)));
    events.push(vocab.id("<e_e>"));
    events.truncate(ev.max(2));
    let mut target = Vec::new();
    let mut sim = vec![vec![0f32; sentences]; sentences];
    for s in 0..sentences {
        target.extend((0..3).map(|k| word(s * 3 + k + id)));
        target.push(vocab.separator_id(s + 1));
        for t in 0..sentences {
            sim[s][t] = if s == t { 1.0 } else { 0.3 + 0.1 * ((s + t + id) % 5) as f32 };
        }
    }
    target.push(vocab.id("</s>"));
    Example {
        id: format!("syn-{id}"),
        context,
        events,
        target,
        sim_target: Some(sim),
        truncated: false,
    }
}

pub fn batch_of(model: &EventStoryModel, examples: &[Example]) -> Batch {
    let refs: Vec<&Example> = examples.iter().collect();
    Batch::new(&refs, InputLayout::Separate, &model.vocab, model.dtype(), model.device()).unwrap()
}

pub fn flat(t: &Tensor) -> Vec<f64> {
    t.to_dtype(DType::F64).unwrap().flatten_all().unwrap().to_vec1().unwrap()
}

pub fn tensor(data: &[f64], shape: &[usize]) -> Tensor {
    Tensor::from_vec(data.to_vec(), shape, &Device::Cpu).unwrap()
}
