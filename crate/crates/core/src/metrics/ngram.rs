//! N-gram overlap, repetition and diversity metrics.
//!
//! All functions take pre-tokenized input produced by
//! [`crate::text::tokenize`].

use std::collections::{HashMap, HashSet};

use super::{Curve, MetricsError};
use crate::text::ngrams;

type Counts<'a> = HashMap<&'a [String], usize>;

fn count_ngrams(tokens: &[String], n: usize) -> Counts<'_> {
    let mut counts = HashMap::new();
    for g in ngrams(tokens, n) {
        *counts.entry(g).or_insert(0) += 1;
    }
    counts
}

fn clipped_overlap(cand: &Counts<'_>, reference: &Counts<'_>) -> usize {
    cand.iter()
        .map(|(g, c)| (*c).min(reference.get(g).copied().unwrap_or(0)))
        .sum()
}

fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// ROUGE-n F-measure of one candidate against one reference, in [0, 1].
pub fn rouge_n_pair(candidate: &[String], reference: &[String], n: usize) -> f64 {
    let c = count_ngrams(candidate, n);
    let r = count_ngrams(reference, n);
    let c_total: usize = c.values().sum();
    let r_total: usize = r.values().sum();
    if c_total == 0 || r_total == 0 {
        return 0.0;
    }
    let overlap = clipped_overlap(&c, &r) as f64;
    f_measure(overlap / c_total as f64, overlap / r_total as f64)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L (longest common subsequence) F-measure, in [0, 1].
pub fn rouge_l_pair(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let l = lcs_len(candidate, reference) as f64;
    f_measure(l / candidate.len() as f64, l / reference.len() as f64)
}

fn check_aligned(candidates: &[Vec<String>], references: &[Vec<String>]) -> Result<(), MetricsError> {
    if candidates.is_empty() {
        return Err(MetricsError::EmptyInput("candidates"));
    }
    if candidates.len() != references.len() {
        return Err(MetricsError::Misaligned {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    Ok(())
}

/// Mean ROUGE-n F-measure over aligned pairs, scaled to 0-100.
pub fn rouge_n(candidates: &[Vec<String>], references: &[Vec<String>], n: usize) -> Result<f64, MetricsError> {
    check_aligned(candidates, references)?;
    let sum: f64 = candidates
        .iter()
        .zip(references)
        .map(|(c, r)| rouge_n_pair(c, r, n))
        .sum();
    Ok(100.0 * sum / candidates.len() as f64)
}

/// Mean ROUGE-L F-measure over aligned pairs, scaled to 0-100.
pub fn rouge_l(candidates: &[Vec<String>], references: &[Vec<String>]) -> Result<f64, MetricsError> {
    check_aligned(candidates, references)?;
    let sum: f64 = candidates
        .iter()
        .zip(references)
        .map(|(c, r)| rouge_l_pair(c, r))
        .sum();
    Ok(100.0 * sum / candidates.len() as f64)
}

/// Corpus BLEU with uniform weights up to `n` and the brevity penalty,
/// in [0, 1]. Zero if any n-gram order has no match.
pub fn bleu_n(candidates: &[Vec<String>], references: &[Vec<String>], n: usize) -> Result<f64, MetricsError> {
    check_aligned(candidates, references)?;
    if n == 0 {
        return Err(MetricsError::InvalidOrder(n));
    }
    let mut matched = vec![0usize; n];
    let mut total = vec![0usize; n];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);
    for (c, r) in candidates.iter().zip(references) {
        cand_len += c.len();
        ref_len += r.len();
        for k in 1..=n {
            let cc = count_ngrams(c, k);
            let rc = count_ngrams(r, k);
            matched[k - 1] += clipped_overlap(&cc, &rc);
            total[k - 1] += cc.values().sum::<usize>();
        }
    }
    if cand_len == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for k in 0..n {
        if matched[k] == 0 || total[k] == 0 {
            return Ok(0.0);
        }
        log_sum += (matched[k] as f64 / total[k] as f64).ln();
    }
    let bp = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok(bp * (log_sum / n as f64).exp())
}

/// True when some 4-gram occurs at least `n` times in the story.
pub fn has_repeated_fourgram(story: &[String], n: usize) -> bool {
    count_ngrams(story, 4).values().any(|&c| c >= n)
}

/// Fraction of stories containing a 4-gram repeated at least `n` times.
pub fn lexical_repetition(stories: &[Vec<String>], n: usize) -> Result<f64, MetricsError> {
    if stories.is_empty() {
        return Err(MetricsError::EmptyInput("stories"));
    }
    let hits = stories.iter().filter(|s| has_repeated_fourgram(s, n)).count();
    Ok(hits as f64 / stories.len() as f64)
}

/// Distinct n-grams over all n-grams, pooled over the corpus. N-grams do
/// not cross story boundaries.
pub fn distinct_n(stories: &[Vec<String>], n: usize) -> Result<f64, MetricsError> {
    let mut unique: HashSet<&[String]> = HashSet::new();
    let mut total = 0usize;
    for s in stories {
        for g in ngrams(s, n) {
            unique.insert(g);
            total += 1;
        }
    }
    if total == 0 {
        return Err(MetricsError::NoNgrams(n));
    }
    Ok(unique.len() as f64 / total as f64)
}

/// Trigram overlap of each story sentence with everything before it; the
/// leading context counts as the first sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct StoryRepetition {
    /// One ratio per story sentence (context excluded).
    pub ratios: Vec<f64>,
    /// Sentences shorter than three tokens, scored 0.
    pub short: Vec<usize>,
}

impl StoryRepetition {
    pub fn aggregate(&self) -> f64 {
        super::mean(&self.ratios)
    }
}

pub fn intra_story_repetition(context: &[String], sentences: &[Vec<String>]) -> StoryRepetition {
    let mut seen: HashSet<&[String]> = ngrams(context, 3).collect();
    let mut ratios = Vec::with_capacity(sentences.len());
    let mut short = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        let grams: HashSet<&[String]> = ngrams(s, 3).collect();
        if s.len() < 3 || grams.is_empty() {
            short.push(i);
            ratios.push(0.0);
        } else {
            let shared = grams.iter().filter(|g| seen.contains(*g)).count();
            ratios.push(shared as f64 / grams.len() as f64);
        }
        seen.extend(grams);
    }
    StoryRepetition { ratios, short }
}

/// Per-index intra-story repetition over a corpus. Index 0 of the curve is
/// the first story sentence (second sentence overall).
pub fn repetition_curve<'a, I>(stories: I) -> Curve
where
    I: IntoIterator<Item = (&'a [String], &'a [Vec<String>])>,
{
    let mut rows = Vec::new();
    let mut flagged = 0;
    for (context, sentences) in stories {
        let rep = intra_story_repetition(context, sentences);
        flagged += rep.short.len();
        rows.push(rep.ratios);
    }
    Curve::from_rows(&rows, flagged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    #[test]
    fn rouge_identity_and_disjoint() {
        let a = vec![tokenize("the cat sat on the mat")];
        assert!((rouge_n(&a, &a, 1).unwrap() - 100.0).abs() < 1e-9);
        assert!((rouge_l(&a, &a).unwrap() - 100.0).abs() < 1e-9);
        let b = vec![tokenize("dogs bark loudly")];
        assert_eq!(rouge_n(&a, &b, 1).unwrap(), 0.0);
        assert_eq!(bleu_n(&a, &b, 1).unwrap(), 0.0);
    }

    #[test]
    fn empty_candidate_scores_zero() {
        assert_eq!(rouge_n_pair(&[], &tokenize("a b"), 1), 0.0);
        assert_eq!(bleu_n(&[vec![]], &[tokenize("a b")], 1).unwrap(), 0.0);
    }

    #[test]
    fn repetition_examples() {
        assert!(has_repeated_fourgram(&tokenize("a b c d x a b c d"), 2));
        assert!(!has_repeated_fourgram(&tokenize("a b c d e f"), 2));
        let story = vec![tokenize("a b c d")];
        let twice = vec![tokenize("a b c d a b c d")];
        assert_eq!(lexical_repetition(&story, 2).unwrap(), 0.0);
        assert_eq!(lexical_repetition(&twice, 2).unwrap(), 1.0);
    }

    #[test]
    fn distinct_examples() {
        let k = vec![tokenize("a b c d"); 5];
        assert!((distinct_n(&k, 4).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(distinct_n(&[tokenize("a b c d e")], 2).unwrap(), 1.0);
        assert!(distinct_n(&[tokenize("a b")], 4).is_err());
    }

    #[test]
    fn intra_repetition_examples() {
        let ctx = tokenize("he went to the store");
        let rep = intra_story_repetition(&ctx, &[tokenize("he went to the store")]);
        assert_eq!(rep.ratios, vec![1.0]);
        let rep = intra_story_repetition(&tokenize("a b c"), &[tokenize("d e f"), tokenize("hi")]);
        assert_eq!(rep.ratios, vec![0.0, 0.0]);
        assert_eq!(rep.short, vec![1]);
    }
}
