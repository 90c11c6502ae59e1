//! Sentence-similarity head, its targets, and the on-disk target cache.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use candle_core::Tensor;
use eventstory_core::metrics::{cosine, WordEmbeddingTable};
use sha2::{Digest, Sha256};

use crate::params::{Init, ParamStore};
use crate::ModelError;

pub const SIMILARITY_PARAM: &str = "similarity.w";

/// Bilinear scorer over separator states: `sigmoid(u_ij + u_ji)` with
/// `u_ij = h_i^T W h_j`.
#[derive(Debug, Clone)]
pub struct SimilarityHead {
    pub weight: Tensor,
}

impl SimilarityHead {
    pub fn new(store: &mut ParamStore, dim: usize, std: f64) -> Result<Self, ModelError> {
        Ok(SimilarityHead {
            weight: store.get_or_init(SIMILARITY_PARAM, &[dim, dim], Init::Normal(std))?,
        })
    }

    /// `states`: `(m, width)`. Returns the `(m, m)` prediction matrix, which
    /// is symmetric bit for bit because `u_ij + u_ji` commutes.
    pub fn predict(&self, states: &Tensor) -> Result<Tensor, ModelError> {
        let u = states.matmul(&self.weight)?.matmul(&states.t()?)?;
        let sym = (&u + &u.t()?)?;
        Ok(candle_nn::ops::sigmoid(&sym)?)
    }
}

/// Maps a tokenized sentence to a fixed-width vector.
pub trait SentenceEmbedder: Send + Sync {
    /// Identifies the provider in caches and manifests.
    fn name(&self) -> String;
    fn embed(&self, tokens: &[String]) -> Vec<f64>;
}

/// Mean of pretrained word vectors.
pub struct MeanWordVectors {
    pub table: WordEmbeddingTable,
}

impl SentenceEmbedder for MeanWordVectors {
    fn name(&self) -> String {
        format!("mean-word-vectors:{}:{}d", self.table.source(), self.table.dim())
    }

    fn embed(&self, tokens: &[String]) -> Vec<f64> {
        self.table.sentence_embedding(tokens).0
    }
}

/// Feature-hashed bag of words, for when no vectors are available.
pub struct HashedBagOfWords {
    pub dim: usize,
}

impl SentenceEmbedder for HashedBagOfWords {
    fn name(&self) -> String {
        format!("hashed-bow:{}d", self.dim)
    }

    fn embed(&self, tokens: &[String]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for t in tokens {
            let h = Sha256::digest(t.as_bytes());
            let slot = u64::from_le_bytes(h[..8].try_into().expect("8 bytes")) as usize % self.dim.max(1);
            let sign = if h[8] & 1 == 0 { 1.0 } else { -1.0 };
            v[slot] += sign;
        }
        v
    }
}

/// Cosine matrix of the reference sentences. The diagonal is 1; pairs with
/// a zero-vector operand score 0 and are counted.
pub fn similarity_targets(sentences: &[Vec<String>], embedder: &dyn SentenceEmbedder) -> (Vec<Vec<f32>>, usize) {
    let vecs: Vec<Vec<f64>> = sentences.iter().map(|s| embedder.embed(s)).collect();
    let zero: Vec<bool> = vecs.iter().map(|v| v.iter().all(|x| *x == 0.0)).collect();
    let m = vecs.len();
    let mut out = vec![vec![0f32; m]; m];
    for i in 0..m {
        out[i][i] = 1.0;
        for j in (i + 1)..m {
            let c = cosine(&vecs[i], &vecs[j]) as f32;
            out[i][j] = c;
            out[j][i] = c;
        }
    }
    let zeros = zero.iter().filter(|z| **z).count();
    if zeros > 0 {
        log::warn!("{zeros} sentence(s) embedded to the zero vector; their similarities are 0");
    }
    (out, zeros)
}

const CACHE_MAGIC: &[u8; 4] = b"SIMT";
const CACHE_VERSION: u32 = 1;

pub fn cache_file_name(dataset: &str, split: &str) -> String {
    format!("{dataset}.{split}.simtargets.bin")
}

/// Layout: magic, version, provider-name length and bytes, story count,
/// then per story `m` followed by `m * m` little-endian f32 cells.
pub fn write_cache(path: &Path, provider: &str, matrices: &[Vec<Vec<f32>>]) -> Result<(), ModelError> {
    let io = |e: std::io::Error| ModelError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(CACHE_MAGIC).map_err(io)?;
    w.write_all(&CACHE_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(provider.len() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(provider.as_bytes()).map_err(io)?;
    w.write_all(&(matrices.len() as u32).to_le_bytes()).map_err(io)?;
    for m in matrices {
        w.write_all(&(m.len() as u32).to_le_bytes()).map_err(io)?;
        for row in m {
            for v in row {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

/// Returns the provider name and the matrices.
pub fn read_cache(path: &Path) -> Result<(String, Vec<Vec<Vec<f32>>>), ModelError> {
    let io = |e: std::io::Error| ModelError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let bad = |m: &str| ModelError::Io {
        path: path.display().to_string(),
        message: m.to_string(),
    };
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut u32_buf = [0u8; 4];
    let mut read_u32 = |r: &mut BufReader<File>| -> Result<u32, ModelError> {
        r.read_exact(&mut u32_buf).map_err(io)?;
        Ok(u32::from_le_bytes(u32_buf))
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != CACHE_MAGIC {
        return Err(bad("not a similarity-target cache"));
    }
    if read_u32(&mut r)? != CACHE_VERSION {
        return Err(bad("unsupported cache version"));
    }
    let name_len = read_u32(&mut r)? as usize;
    let mut name = vec![0u8; name_len];
    r.read_exact(&mut name).map_err(io)?;
    let name = String::from_utf8(name).map_err(|_| bad("provider name is not UTF-8"))?;
    let count = read_u32(&mut r)? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let m = read_u32(&mut r)? as usize;
        let mut cells = vec![0u8; m * m * 4];
        r.read_exact(&mut cells).map_err(io)?;
        let flat: Vec<f32> = cells
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        out.push(flat.chunks(m.max(1)).take(m).map(<[f32]>::to_vec).collect());
    }
    Ok((name, out))
}
