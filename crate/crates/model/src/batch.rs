//! Turning stories and their events into padded id tensors.

use std::collections::HashMap;

use candle_core::{DType, Device, Tensor};
use eventstory_core::corpus::StoryRecord;
use eventstory_core::events::{EventRecord, EVENT_END};

use crate::similarity::{similarity_targets, SentenceEmbedder};
use crate::vocab::{Vocab, BOS_ID, EOS_ID, PAD_ID};
use crate::ModelError;

/// One training or generation instance in id space.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub context: Vec<u32>,
    /// The serialized event string.
    pub events: Vec<u32>,
    /// `s1 [sep_1] s2 [sep_2] ... sm [sep_m] </s>`; empty at generation time.
    pub target: Vec<u32>,
    /// Reference sentence similarities, one row per story sentence.
    pub sim_target: Option<Vec<Vec<f32>>>,
    /// Whether inputs were cut to fit the length budget.
    pub truncated: bool,
}

impl Example {
    pub fn decoder_input(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.target.len());
        out.push(BOS_ID);
        out.extend_from_slice(&self.target[..self.target.len().saturating_sub(1)]);
        out
    }

    /// Decoder input positions holding a sentence separator. The state at
    /// such a position has read the whole sentence and its separator.
    pub fn separator_positions(&self, vocab: &Vocab) -> Vec<usize> {
        self.decoder_input()
            .iter()
            .enumerate()
            .filter(|(_, id)| vocab.is_separator(**id))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Sentences joined with numbered separators and closed by the end token.
pub fn build_target(sentences: &[Vec<String>], vocab: &Vocab) -> Vec<u32> {
    let mut out = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        out.extend(vocab.encode(s));
        out.push(vocab.separator_id(i + 1));
    }
    out.push(EOS_ID);
    out
}

/// Fit context and events into `max_source` tokens: the event tail goes
/// first, then the context tail. The event string keeps its closing token.
pub fn truncate_inputs(context: &mut Vec<u32>, events: &mut Vec<u32>, max_source: usize, end_id: u32) -> bool {
    let total = context.len() + events.len();
    if total <= max_source {
        return false;
    }
    let mut excess = total - max_source;
    // keep at least "<e_s> <e_e>"
    let cut = excess.min(events.len().saturating_sub(2));
    if cut > 0 {
        let keep = events.len() - cut;
        events.truncate(keep - 1);
        events.push(end_id);
        excess -= cut;
    }
    if excess > 0 {
        let keep = context.len().saturating_sub(excess).max(1);
        context.truncate(keep);
    }
    true
}

pub fn make_example(
    story: &StoryRecord,
    events: &EventRecord,
    vocab: &Vocab,
    max_source: usize,
    max_target: usize,
) -> Example {
    let mut context = vocab.encode(&story.leading_context);
    let ev_tokens: Vec<&str> = events.serialized.split_whitespace().collect();
    let mut ev = vocab.encode(&ev_tokens);
    let mut truncated = truncate_inputs(&mut context, &mut ev, max_source, vocab.id(EVENT_END));
    let mut target = build_target(&story.sentences, vocab);
    if target.len() > max_target {
        target.truncate(max_target - 1);
        target.push(EOS_ID);
        truncated = true;
    }
    if truncated {
        log::warn!("story {} truncated to fit the length limits", story.id);
    }
    Example {
        id: story.id.clone(),
        context,
        events: ev,
        target,
        sim_target: None,
        truncated,
    }
}

/// Every token a corpus feeds the model: contexts, story sentences and
/// serialized events.
pub fn build_vocab(stories: &[StoryRecord], events: &[EventRecord], min_count: usize) -> Vocab {
    let mut tokens: Vec<String> = Vec::new();
    for s in stories {
        tokens.extend(s.leading_context.iter().cloned());
        tokens.extend(s.sentences.iter().flatten().cloned());
    }
    for e in events {
        tokens.extend(e.serialized.split_whitespace().map(String::from));
    }
    Vocab::build(&tokens, min_count)
}

/// Pair stories with their event records by id and build examples, with
/// reference similarity targets when an embedder is given.
pub fn prepare_examples(
    stories: &[StoryRecord],
    events: &[EventRecord],
    vocab: &Vocab,
    embedder: Option<&dyn SentenceEmbedder>,
    max_source: usize,
    max_target: usize,
) -> Result<Vec<Example>, ModelError> {
    let by_id: HashMap<&str, &EventRecord> = events.iter().map(|e| (e.story_id.as_str(), e)).collect();
    stories
        .iter()
        .map(|story| {
            let ev = by_id
                .get(story.id.as_str())
                .ok_or_else(|| ModelError::Input(format!("no events for story {}", story.id)))?;
            let mut ex = make_example(story, ev, vocab, max_source, max_target);
            if let Some(embedder) = embedder {
                ex.sim_target = Some(similarity_targets(&story.sentences, embedder).0);
            }
            Ok(ex)
        })
        .collect()
}

/// Which encoder inputs a batch feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputLayout {
    /// Context and events to their own encoders.
    Separate,
    /// Context followed by events, all to the event encoder (the
    /// single-encoder warm-start stage).
    Concatenated,
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub ids: Vec<String>,
    /// `(batch, context len)` u32; absent for the concatenated layout.
    pub context: Option<Tensor>,
    pub context_lengths: Vec<usize>,
    pub events: Tensor,
    pub event_lengths: Vec<usize>,
    pub decoder_input: Tensor,
    pub targets: Tensor,
    /// 1 for real target tokens, in the model dtype.
    pub target_mask: Tensor,
    pub target_lengths: Vec<usize>,
    pub separators: Vec<Vec<usize>>,
    pub sim_targets: Vec<Option<Tensor>>,
}

fn pad_ids(rows: &[Vec<u32>], device: &Device) -> Result<(Tensor, Vec<usize>), ModelError> {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let mut flat = Vec::with_capacity(rows.len() * width);
    for r in rows {
        flat.extend_from_slice(r);
        flat.extend(std::iter::repeat_n(PAD_ID, width - r.len()));
    }
    Ok((
        Tensor::from_vec(flat, (rows.len(), width), device)?,
        rows.iter().map(Vec::len).collect(),
    ))
}

impl Batch {
    pub fn new(
        examples: &[&Example],
        layout: InputLayout,
        vocab: &Vocab,
        dtype: DType,
        device: &Device,
    ) -> Result<Batch, ModelError> {
        if examples.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let (context, context_lengths, event_rows): (Option<Tensor>, Vec<usize>, Vec<Vec<u32>>) = match layout {
            InputLayout::Separate => {
                let rows: Vec<Vec<u32>> = examples.iter().map(|e| e.context.clone()).collect();
                let (t, l) = pad_ids(&rows, device)?;
                (Some(t), l, examples.iter().map(|e| e.events.clone()).collect())
            }
            InputLayout::Concatenated => (
                None,
                vec![0; examples.len()],
                examples.iter().map(|e| [e.context.as_slice(), &e.events].concat()).collect(),
            ),
        };
        let (events, event_lengths) = pad_ids(&event_rows, device)?;
        let inputs: Vec<Vec<u32>> = examples.iter().map(|e| e.decoder_input()).collect();
        let targets: Vec<Vec<u32>> = examples.iter().map(|e| e.target.clone()).collect();
        let (decoder_input, _) = pad_ids(&inputs, device)?;
        let (targets, target_lengths) = pad_ids(&targets, device)?;
        let width = targets.dim(1)?;
        let mut mask = vec![0f64; examples.len() * width];
        for (b, &len) in target_lengths.iter().enumerate() {
            for j in 0..len {
                mask[b * width + j] = 1.0;
            }
        }
        let target_mask = Tensor::from_vec(mask, (examples.len(), width), device)?.to_dtype(dtype)?;
        let separators = examples.iter().map(|e| e.separator_positions(vocab)).collect();
        let sim_targets = examples
            .iter()
            .map(|e| {
                e.sim_target
                    .as_ref()
                    .map(|m| {
                        let n = m.len();
                        let flat: Vec<f32> = m.iter().flatten().copied().collect();
                        Tensor::from_vec(flat, (n, n), device).and_then(|t| t.to_dtype(dtype))
                    })
                    .transpose()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Batch {
            ids: examples.iter().map(|e| e.id.clone()).collect(),
            context,
            context_lengths,
            events,
            event_lengths,
            decoder_input,
            targets,
            target_mask,
            target_lengths,
            separators,
            sim_targets,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn target_tokens(&self) -> usize {
        self.target_lengths.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocab {
        let words: Vec<String> = "he ran . she sat a b c".split(' ').map(String::from).collect();
        Vocab::build(&words, 1)
    }

    #[test]
    fn target_layout_and_separator_positions() {
        let v = vocab();
        let sents = vec![vec!["he".to_string(), "ran".into()], vec!["she".to_string(), "sat".into()]];
        let target = build_target(&sents, &v);
        assert_eq!(
            v.decode(&target),
            vec!["he", "ran", "[sep_1]", "she", "sat", "[sep_2]", "</s>"]
        );
        let ex = Example {
            id: "x".into(),
            context: vec![],
            events: vec![],
            target,
            sim_target: None,
            truncated: false,
        };
        // decoder input: <s> he ran [sep_1] she sat [sep_2]
        assert_eq!(ex.separator_positions(&v), vec![3, 6]);
    }

    #[test]
    fn events_are_cut_before_context() {
        let mut ctx = vec![10, 11, 12, 13];
        let mut ev = vec![4, 20, 21, 22, 6];
        assert!(truncate_inputs(&mut ctx, &mut ev, 7, 6));
        assert_eq!(ctx, vec![10, 11, 12, 13]);
        assert_eq!(ev, vec![4, 20, 6]);
        let mut ev = vec![4, 20, 21, 22, 6];
        assert!(truncate_inputs(&mut ctx, &mut ev, 4, 6));
        assert_eq!(ev, vec![4, 6]);
        assert_eq!(ctx, vec![10, 11]);
        assert!(!truncate_inputs(&mut ctx, &mut ev, 4, 6));
    }
}
