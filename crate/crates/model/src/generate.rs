//! Nucleus-sampled story generation and output post-processing.

use candle_core::{DType, Tensor};
use eventstory_core::text::{tokenize, SentenceSplitter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::batch::{Batch, Example, InputLayout};
use crate::config::GenerationConfig;
use crate::model::EventStoryModel;
use crate::vocab::{Vocab, BOS_ID, EOS_ID, PAD_ID};
use crate::ModelError;

/// The smallest set of most-likely tokens whose mass reaches `p`,
/// renormalized. Ties keep the lower id first.
pub fn nucleus(probs: &[f64], p: f64) -> Vec<(usize, f64)> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    let mut kept = Vec::new();
    let mut mass = 0.0;
    for i in order {
        kept.push(i);
        mass += probs[i];
        if mass >= p {
            break;
        }
    }
    kept.into_iter().map(|i| (i, probs[i] / mass)).collect()
}

pub fn nucleus_sample<R: Rng>(probs: &[f64], p: f64, rng: &mut R) -> usize {
    let set = nucleus(probs, p);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(i, q) in &set {
        acc += q;
        if u < acc {
            return i;
        }
    }
    set.last().map(|(i, _)| *i).unwrap_or(0)
}

/// Independent stream for one example.
pub fn example_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedStory {
    pub story_id: String,
    /// Space-joined tokens, one entry per sentence.
    pub sentences: Vec<String>,
    pub raw_token_ids: Vec<u32>,
    /// Decoding stopped at the token budget instead of the end token.
    #[serde(default)]
    pub hit_limit: bool,
}

/// Split raw output at separators and drop control tokens. Name
/// placeholders stay. Without any separator, the corpus splitter decides.
pub fn split_output(ids: &[u32], vocab: &Vocab, splitter: &dyn SentenceSplitter) -> Vec<Vec<String>> {
    let ids: Vec<u32> = ids.iter().copied().take_while(|&i| i != EOS_ID).collect();
    let has_sep = ids.iter().any(|&i| vocab.is_separator(i));
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for &id in &ids {
        if vocab.is_separator(id) {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
        } else if !vocab.is_control(id) {
            current.push(vocab.token(id).unwrap_or("<unk>").to_string());
        }
    }
    if !current.is_empty() {
        if has_sep {
            sentences.push(current);
        } else {
            sentences = resplit(&current, splitter);
        }
    }
    sentences
}

/// The splitter keys on capitals after terminal punctuation, which
/// lowercased output lacks, so capitalize those positions first.
fn resplit(tokens: &[String], splitter: &dyn SentenceSplitter) -> Vec<Vec<String>> {
    let mut text = Vec::with_capacity(tokens.len());
    let mut capital = true;
    for t in tokens {
        if capital && !t.starts_with('[') {
            let mut c = t.chars();
            let first: String = c.next().map(|f| f.to_uppercase().collect()).unwrap_or_default();
            text.push(first + c.as_str());
        } else {
            text.push(t.clone());
        }
        capital = matches!(t.as_str(), "." | "!" | "?");
    }
    splitter
        .split(&text.join(" "))
        .iter()
        .map(|s| tokenize(s))
        .filter(|s| !s.is_empty())
        .collect()
}

/// Sample continuations for a slice of examples. Example `k` of the slice
/// draws from the stream `(seed, first_index + k)`.
pub fn generate(
    model: &EventStoryModel,
    examples: &[Example],
    cfg: &GenerationConfig,
    max_new_tokens: usize,
    splitter: &dyn SentenceSplitter,
) -> Result<Vec<GeneratedStory>, ModelError> {
    cfg.validate()?;
    let budget = max_new_tokens.min(model.config.max_target_length.saturating_sub(1)).max(1);
    let mut out = Vec::with_capacity(examples.len());
    for (chunk_no, chunk) in examples.chunks(cfg.batch_size).enumerate() {
        let first = chunk_no * cfg.batch_size;
        let inputs: Vec<Example> = chunk
            .iter()
            .map(|e| Example {
                target: Vec::new(),
                sim_target: None,
                ..e.clone()
            })
            .collect();
        let refs: Vec<&Example> = inputs.iter().collect();
        let batch = Batch::new(&refs, InputLayout::Separate, &model.vocab, model.dtype(), model.device())?;
        let (_, memory) = model.encode(&batch)?;
        let mut rngs: Vec<ChaCha8Rng> = (0..chunk.len()).map(|k| example_rng(cfg.seed, first + k)).collect();
        let mut prefixes: Vec<Vec<u32>> = vec![vec![BOS_ID]; chunk.len()];
        let mut done = vec![false; chunk.len()];
        for _ in 0..budget {
            let t = prefixes[0].len();
            let flat: Vec<u32> = prefixes.iter().flatten().copied().collect();
            let ids = Tensor::from_vec(flat, (chunk.len(), t), model.device())?;
            let hidden = model.decode_hidden(&ids, &memory)?.narrow(1, t - 1, 1)?;
            let probs = crate::layers::softmax_last(&model.logits(&hidden)?)?
                .squeeze(1)?
                .to_dtype(DType::F64)?
                .to_vec2::<f64>()?;
            for (k, row) in probs.iter().enumerate() {
                if done[k] {
                    prefixes[k].push(PAD_ID);
                    continue;
                }
                let next = nucleus_sample(row, cfg.nucleus_p, &mut rngs[k]) as u32;
                prefixes[k].push(next);
                if next == EOS_ID {
                    done[k] = true;
                }
            }
            if done.iter().all(|d| *d) {
                break;
            }
        }
        for (k, e) in chunk.iter().enumerate() {
            let raw: Vec<u32> = prefixes[k][1..].iter().copied().take_while(|&i| i != PAD_ID).collect();
            let sentences = split_output(&raw, &model.vocab, splitter)
                .into_iter()
                .map(|s| s.join(" "))
                .collect();
            if !done[k] {
                log::warn!("story {} reached the {budget}-token limit without an end token", e.id);
            }
            out.push(GeneratedStory {
                story_id: e.id.clone(),
                sentences,
                raw_token_ids: raw,
                hit_limit: !done[k],
            });
        }
    }
    Ok(out)
}

/// 1.2 times the longest target, rounded up.
pub fn default_max_new_tokens(longest_target: usize) -> usize {
    (longest_target * 6).div_ceil(5).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use eventstory_core::text::RuleSplitter;

    #[test]
    fn nucleus_sets() {
        assert_eq!(nucleus(&[0.7, 0.2, 0.1], 0.7), vec![(0, 1.0)]);
        let n = nucleus(&[0.5, 0.3, 0.2], 0.8);
        assert_eq!(n.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1]);
        assert!((n[0].1 - 0.625).abs() < 1e-12);
        let full = nucleus(&[0.2, 0.5, 0.3], 1.0);
        assert_eq!(full.len(), 3);
        assert!((full[0].1 - 0.5).abs() < 1e-12);
        // a vanishing nucleus is the argmax
        assert_eq!(nucleus(&[0.1, 0.6, 0.3], f64::MIN_POSITIVE), vec![(1, 1.0)]);
    }

    #[test]
    fn outputs_split_at_separators() {
        let words: Vec<String> = "he ran . she sat".split(' ').map(String::from).collect();
        let v = Vocab::build(&words, 1);
        let ids: Vec<u32> = ["he", "ran", "[sep_1]", "[MALE]", "sat", "[sep_2]", "</s>", "he"]
            .iter()
            .map(|t| v.id(t))
            .collect();
        let s = split_output(&ids, &v, &RuleSplitter);
        assert_eq!(s, vec![vec!["he", "ran"], vec!["[MALE]", "sat"]]);
        let ids: Vec<u32> = ["he", "ran", ".", "she", "sat", ".", "</s>"].iter().map(|t| v.id(t)).collect();
        assert_eq!(
            split_output(&ids, &v, &RuleSplitter),
            vec![vec!["he", "ran", "."], vec!["she", "sat", "."]]
        );
    }

    #[test]
    fn budget_rounds_up() {
        assert_eq!(default_max_new_tokens(50), 60);
        assert_eq!(default_max_new_tokens(51), 62);
    }
}
