//! The full metric report over a set of generated stories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::embedding::{coherence_curve, relevance_curve, WordEmbeddingTable};
use super::ngram::{bleu_n, distinct_n, lexical_repetition, repetition_curve, rouge_l, rouge_n};
use super::{Curve, MetricsError};

/// Top-level keys every serialized report carries.
pub const REPORT_KEYS: [&str; 9] = [
    "stories",
    "ppl",
    "rouge",
    "bleu",
    "lr",
    "distinct",
    "intra_repetition",
    "intra_coherence",
    "intra_relevance",
];

pub const ROUGE_ORDERS: [&str; 3] = ["1", "2", "l"];
pub const BLEU_ORDERS: [usize; 2] = [1, 2];
pub const LR_ORDERS: [usize; 3] = [2, 3, 4];
pub const DISTINCT_ORDERS: [usize; 4] = [1, 2, 3, 4];

/// One story to score, already tokenized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalStory {
    pub id: String,
    pub context: Vec<String>,
    pub candidate: Vec<Vec<String>>,
    pub reference: Vec<Vec<String>>,
}

impl EvalStory {
    pub fn candidate_tokens(&self) -> Vec<String> {
        self.candidate.concat()
    }

    pub fn reference_tokens(&self) -> Vec<String> {
        self.reference.concat()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricFlags {
    pub empty_candidates: usize,
    pub short_sentences: usize,
    pub zero_embeddings: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub stories: usize,
    /// Teacher-forced perplexity of the model that wrote the stories, when
    /// a model was supplied.
    pub ppl: Option<f64>,
    /// ROUGE F-measures on a 0-100 scale, keyed "1", "2", "l".
    pub rouge: BTreeMap<String, f64>,
    /// Corpus BLEU on a 0-1 scale.
    pub bleu: BTreeMap<String, f64>,
    pub lr: BTreeMap<String, f64>,
    pub distinct: BTreeMap<String, f64>,
    pub intra_repetition: Curve,
    /// Keyed by embedding source.
    pub intra_coherence: BTreeMap<String, Curve>,
    pub intra_relevance: BTreeMap<String, Curve>,
    pub flags: MetricFlags,
}

/// Score generated stories against references. Distinct-n orders with no
/// n-grams at all are reported as 0 rather than failing the whole report.
pub fn evaluate(stories: &[EvalStory], tables: &[WordEmbeddingTable]) -> Result<MetricReport, MetricsError> {
    if stories.is_empty() {
        return Err(MetricsError::EmptyInput("stories"));
    }
    let cands: Vec<Vec<String>> = stories.iter().map(EvalStory::candidate_tokens).collect();
    let refs: Vec<Vec<String>> = stories.iter().map(EvalStory::reference_tokens).collect();

    let mut rouge = BTreeMap::new();
    rouge.insert("1".to_string(), rouge_n(&cands, &refs, 1)?);
    rouge.insert("2".to_string(), rouge_n(&cands, &refs, 2)?);
    rouge.insert("l".to_string(), rouge_l(&cands, &refs)?);
    let mut bleu = BTreeMap::new();
    for n in BLEU_ORDERS {
        bleu.insert(n.to_string(), bleu_n(&cands, &refs, n)?);
    }
    let mut lr = BTreeMap::new();
    for n in LR_ORDERS {
        lr.insert(n.to_string(), lexical_repetition(&cands, n)?);
    }
    let mut distinct = BTreeMap::new();
    for n in DISTINCT_ORDERS {
        let v = match distinct_n(&cands, n) {
            Ok(v) => v,
            Err(MetricsError::NoNgrams(_)) => 0.0,
            Err(e) => return Err(e),
        };
        distinct.insert(n.to_string(), v);
    }

    let intra_repetition = repetition_curve(
        stories
            .iter()
            .map(|s| (s.context.as_slice(), s.candidate.as_slice())),
    );
    let mut flags = MetricFlags {
        empty_candidates: cands.iter().filter(|c| c.is_empty()).count(),
        short_sentences: intra_repetition.flagged,
        zero_embeddings: BTreeMap::new(),
    };
    let mut intra_coherence = BTreeMap::new();
    let mut intra_relevance = BTreeMap::new();
    for table in tables {
        let key = table.source().name().to_string();
        let coh = coherence_curve(stories.iter().map(|s| s.candidate.as_slice()), table);
        let rel = relevance_curve(
            stories
                .iter()
                .map(|s| (s.context.as_slice(), s.candidate.as_slice())),
            table,
        );
        flags.zero_embeddings.insert(key.clone(), coh.flagged.max(rel.flagged));
        intra_coherence.insert(key.clone(), coh);
        intra_relevance.insert(key, rel);
    }
    Ok(MetricReport {
        stories: stories.len(),
        ppl: None,
        rouge,
        bleu,
        lr,
        distinct,
        intra_repetition,
        intra_coherence,
        intra_relevance,
        flags,
    })
}
