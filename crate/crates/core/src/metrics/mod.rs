//! Automatic story metrics: perplexity, ROUGE, BLEU, lexical repetition,
//! distinct-n and the intra-story repetition, coherence and relevance
//! curves.

pub mod embedding;
pub mod ngram;
pub mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embedding::{
    coherence_curve, cosine, intra_coherence, intra_relevance, relevance_curve, EmbeddingSource,
    StoryScores, WordEmbeddingTable,
};
pub use ngram::{
    bleu_n, distinct_n, intra_story_repetition, lexical_repetition, repetition_curve, rouge_l,
    rouge_n, StoryRepetition,
};
pub use report::{evaluate, EvalStory, MetricFlags, MetricReport, REPORT_KEYS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no {0} to evaluate")]
    EmptyInput(&'static str),
    #[error("{candidates} candidates but {references} references")]
    Misaligned { candidates: usize, references: usize },
    #[error("n-gram order must be positive, got {0}")]
    InvalidOrder(usize),
    #[error("no {0}-grams in the corpus; distinct-{0} is undefined")]
    NoNgrams(usize),
    #[error("vector has dimension {found}, table has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("{path} line {line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown embedding source '{0}' (expected wiki, twitter or common)")]
    UnknownSource(String),
    #[error("negative log-likelihood must be finite and non-negative")]
    InvalidLikelihood,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// exp of the mean token negative log-likelihood.
pub fn perplexity(token_nlls: &[f64]) -> Result<f64, MetricsError> {
    if token_nlls.is_empty() {
        return Err(MetricsError::EmptyInput("tokens"));
    }
    if token_nlls.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(MetricsError::InvalidLikelihood);
    }
    Ok(mean(token_nlls).exp())
}

/// Perplexity from a summed NLL and a token count.
pub fn perplexity_from_sum(total_nll: f64, tokens: usize) -> Result<f64, MetricsError> {
    if tokens == 0 {
        return Err(MetricsError::EmptyInput("tokens"));
    }
    if !total_nll.is_finite() || total_nll < 0.0 {
        return Err(MetricsError::InvalidLikelihood);
    }
    Ok((total_nll / tokens as f64).exp())
}

/// A per-sentence-index curve and its aggregate (the mean of the curve).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub per_index: Vec<f64>,
    /// How many stories contributed to each index.
    pub counts: Vec<usize>,
    pub aggregate: f64,
    /// Items scored by convention rather than measured (too short, or no
    /// in-vocabulary word).
    pub flagged: usize,
}

impl Curve {
    /// Average ragged per-story rows position by position.
    pub fn from_rows(rows: &[Vec<f64>], flagged: usize) -> Curve {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut sums = vec![0.0; width];
        let mut counts = vec![0usize; width];
        for row in rows {
            for (k, v) in row.iter().enumerate() {
                sums[k] += v;
                counts[k] += 1;
            }
        }
        let per_index: Vec<f64> = sums.iter().zip(&counts).map(|(s, c)| s / *c as f64).collect();
        let aggregate = mean(&per_index);
        Curve {
            per_index,
            counts,
            aggregate,
            flagged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perplexity_cases() {
        let v = 7.0f64;
        assert!((perplexity(&[v.ln(); 4]).unwrap() - v).abs() < 1e-9);
        assert_eq!(perplexity(&[0.0, 0.0]).unwrap(), 1.0);
        let p = perplexity(&[-(0.5f64.ln()), -(0.25f64.ln())]).unwrap();
        assert!((p - 8f64.sqrt()).abs() < 1e-12);
        assert!(perplexity(&[]).is_err());
    }

    #[test]
    fn curve_averages_ragged_rows() {
        let c = Curve::from_rows(&[vec![1.0, 0.0], vec![0.0]], 0);
        assert_eq!(c.per_index, vec![0.5, 0.0]);
        assert_eq!(c.counts, vec![2, 1]);
        assert_eq!(c.aggregate, 0.25);
    }
}
