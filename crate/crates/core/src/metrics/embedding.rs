//! Word-vector tables and embedding-based coherence and relevance.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Curve, MetricsError};

/// Which pretrained vector set a table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSource {
    /// Wikipedia 2014 + Gigaword 5.
    Wiki,
    Twitter,
    /// Common Crawl.
    Common,
}

impl EmbeddingSource {
    pub const ALL: [EmbeddingSource; 3] = [EmbeddingSource::Wiki, EmbeddingSource::Twitter, EmbeddingSource::Common];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingSource::Wiki => "wiki",
            EmbeddingSource::Twitter => "twitter",
            EmbeddingSource::Common => "common",
        }
    }
}

impl fmt::Display for EmbeddingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbeddingSource {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wiki" => Ok(EmbeddingSource::Wiki),
            "twitter" | "twit" => Ok(EmbeddingSource::Twitter),
            "common" | "comm" => Ok(EmbeddingSource::Common),
            other => Err(MetricsError::UnknownSource(other.to_string())),
        }
    }
}

/// Word vectors of one fixed dimension.
#[derive(Debug, Clone)]
pub struct WordEmbeddingTable {
    vectors: HashMap<String, Vec<f32>>,
    dim: usize,
    source: EmbeddingSource,
}

impl WordEmbeddingTable {
    pub fn new(dim: usize, source: EmbeddingSource) -> Self {
        WordEmbeddingTable {
            vectors: HashMap::new(),
            dim,
            source,
        }
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f32>) -> Result<(), MetricsError> {
        if vector.len() != self.dim {
            return Err(MetricsError::Dimension {
                expected: self.dim,
                found: vector.len(),
            });
        }
        self.vectors.insert(word.to_string(), vector);
        Ok(())
    }

    /// Read the text format, one `word v1 ... vd` per line. A word2vec-style
    /// `count dim` header line is skipped. With `vocab`, only listed words
    /// are kept.
    pub fn from_reader<R: BufRead>(
        reader: R,
        source: EmbeddingSource,
        vocab: Option<&HashSet<String>>,
        origin: &str,
    ) -> Result<Self, MetricsError> {
        let mut table: Option<WordEmbeddingTable> = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| MetricsError::Io {
                path: origin.to_string(),
                message: e.to_string(),
            })?;
            let mut parts = line.split(' ').filter(|p| !p.is_empty());
            let Some(word) = parts.next() else { continue };
            let rest: Vec<&str> = parts.collect();
            if i == 0 && rest.len() == 1 && word.parse::<usize>().is_ok() {
                continue;
            }
            if let Some(v) = vocab {
                if !v.contains(word) {
                    // still check the dimension of the first line
                    if table.is_some() {
                        continue;
                    }
                }
            }
            let vector: Result<Vec<f32>, _> = rest.iter().map(|x| x.parse::<f32>()).collect();
            let vector = vector.map_err(|_| MetricsError::Format {
                path: origin.to_string(),
                line: i + 1,
                message: "non-numeric vector component".into(),
            })?;
            let t = table.get_or_insert_with(|| WordEmbeddingTable::new(vector.len(), source));
            if vector.len() != t.dim {
                return Err(MetricsError::Format {
                    path: origin.to_string(),
                    line: i + 1,
                    message: format!("expected {} components, found {}", t.dim, vector.len()),
                });
            }
            if vocab.is_none_or(|v| v.contains(word)) {
                t.vectors.insert(word.to_string(), vector);
            }
        }
        table.ok_or(MetricsError::Format {
            path: origin.to_string(),
            line: 0,
            message: "no vectors found".into(),
        })
    }

    pub fn load(path: &Path, source: EmbeddingSource, vocab: Option<&HashSet<String>>) -> Result<Self, MetricsError> {
        let file = File::open(path).map_err(|e| MetricsError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_reader(BufReader::new(file), source, vocab, &path.display().to_string())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> EmbeddingSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary word vectors. Returns the zero vector and
    /// `false` when no token is covered.
    pub fn sentence_embedding(&self, tokens: &[String]) -> (Vec<f64>, bool) {
        let mut acc = vec![0.0f64; self.dim];
        let mut hits = 0usize;
        for t in tokens {
            if let Some(v) = self.vectors.get(t.as_str()) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += f64::from(*x);
                }
                hits += 1;
            }
        }
        if hits > 0 {
            for a in &mut acc {
                *a /= hits as f64;
            }
        }
        (acc, hits > 0)
    }
}

/// Cosine similarity; 0 when either operand is the zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Per-story values with the count of zero-vector operands.
#[derive(Debug, Clone, PartialEq)]
pub struct StoryScores {
    pub values: Vec<f64>,
    pub zero_vectors: usize,
}

impl StoryScores {
    pub fn aggregate(&self) -> f64 {
        super::mean(&self.values)
    }
}

/// Cosine of each pair of neighbouring story sentences.
pub fn intra_coherence(sentences: &[Vec<String>], table: &WordEmbeddingTable) -> StoryScores {
    let embedded: Vec<(Vec<f64>, bool)> = sentences.iter().map(|s| table.sentence_embedding(s)).collect();
    let zero_vectors = embedded.iter().filter(|(_, ok)| !ok).count();
    let values = embedded.windows(2).map(|w| cosine(&w[0].0, &w[1].0)).collect();
    StoryScores { values, zero_vectors }
}

/// Cosine of the leading context with each story sentence.
pub fn intra_relevance(context: &[String], sentences: &[Vec<String>], table: &WordEmbeddingTable) -> StoryScores {
    let (ctx, ctx_ok) = table.sentence_embedding(context);
    let mut zero_vectors = usize::from(!ctx_ok);
    let values = sentences
        .iter()
        .map(|s| {
            let (e, ok) = table.sentence_embedding(s);
            zero_vectors += usize::from(!ok);
            cosine(&ctx, &e)
        })
        .collect();
    StoryScores { values, zero_vectors }
}

pub fn coherence_curve<'a, I>(stories: I, table: &WordEmbeddingTable) -> Curve
where
    I: IntoIterator<Item = &'a [Vec<String>]>,
{
    let mut rows = Vec::new();
    let mut flagged = 0;
    for s in stories {
        let sc = intra_coherence(s, table);
        flagged += sc.zero_vectors;
        rows.push(sc.values);
    }
    Curve::from_rows(&rows, flagged)
}

pub fn relevance_curve<'a, I>(stories: I, table: &WordEmbeddingTable) -> Curve
where
    I: IntoIterator<Item = (&'a [String], &'a [Vec<String>])>,
{
    let mut rows = Vec::new();
    let mut flagged = 0;
    for (ctx, s) in stories {
        let sc = intra_relevance(ctx, s, table);
        flagged += sc.zero_vectors;
        rows.push(sc.values);
    }
    Curve::from_rows(&rows, flagged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> WordEmbeddingTable {
        let text = "a 1 0\nb 0 1\nc 1 1\n";
        WordEmbeddingTable::from_reader(text.as_bytes(), EmbeddingSource::Wiki, None, "toy").unwrap()
    }

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn mean_pooling() {
        let table = toy();
        assert_eq!(table.sentence_embedding(&t("a")), (vec![1.0, 0.0], true));
        assert_eq!(table.sentence_embedding(&t("a b")), (vec![0.5, 0.5], true));
        assert_eq!(table.sentence_embedding(&t("zzz")), (vec![0.0, 0.0], false));
    }

    #[test]
    fn coherence_and_relevance() {
        let table = toy();
        let c = intra_coherence(&[t("a"), t("a"), t("b")], &table);
        assert_eq!(c.values, vec![1.0, 0.0]);
        let r = intra_relevance(&t("c"), &[t("a"), t("zzz")], &table);
        assert!((r.values[0] - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.values[1], 0.0);
        assert_eq!(r.zero_vectors, 1);
    }

    #[test]
    fn header_skipped_and_vocab_filtered() {
        let text = "3 2\na 1 0\nb 0 1\nc 1 1\n";
        let vocab: HashSet<String> = ["b".to_string()].into();
        let table = WordEmbeddingTable::from_reader(text.as_bytes(), EmbeddingSource::Common, Some(&vocab), "x").unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.dim(), 2);
        let bad = "a 1 0\nb 1\n";
        assert!(WordEmbeddingTable::from_reader(bad.as_bytes(), EmbeddingSource::Wiki, None, "x").is_err());
    }
}
