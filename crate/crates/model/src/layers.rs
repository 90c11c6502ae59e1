//! Transformer building blocks over `(batch, time, width)` tensors.

use candle_core::{DType, Device, Tensor, D};

use crate::params::{Init, ParamStore};
use crate::ModelError;

/// Additive attention bias for masked keys.
pub const MASK_VALUE: f64 = -1e9;

#[derive(Debug, Clone)]
pub struct Linear {
    /// Stored as `(in, out)` so inputs multiply from the left.
    pub weight: Tensor,
    pub bias: Option<Tensor>,
}

impl Linear {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        input: usize,
        output: usize,
        bias: bool,
        std: f64,
    ) -> Result<Self, ModelError> {
        let weight = store.get_or_init(&format!("{name}.w"), &[input, output], Init::Normal(std))?;
        let bias = if bias {
            Some(store.get_or_init(&format!("{name}.b"), &[output], Init::Zeros)?)
        } else {
            None
        };
        Ok(Linear { weight, bias })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, ModelError> {
        let y = x.broadcast_matmul(&self.weight)?;
        Ok(match &self.bias {
            Some(b) => y.broadcast_add(b)?,
            None => y,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LayerNorm {
    pub gain: Tensor,
    pub bias: Tensor,
    pub eps: f64,
}

impl LayerNorm {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize) -> Result<Self, ModelError> {
        Ok(LayerNorm {
            gain: store.get_or_init(&format!("{name}.g"), &[dim], Init::Ones)?,
            bias: store.get_or_init(&format!("{name}.b"), &[dim], Init::Zeros)?,
            eps: 1e-5,
        })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, ModelError> {
        let mean = x.mean_keepdim(D::Minus1)?;
        let centered = x.broadcast_sub(&mean)?;
        let var = centered.sqr()?.mean_keepdim(D::Minus1)?;
        let normed = centered.broadcast_div(&(var + self.eps)?.sqrt()?)?;
        Ok(normed.broadcast_mul(&self.gain)?.broadcast_add(&self.bias)?)
    }
}

/// Softmax over the last axis built from differentiable primitives.
pub fn softmax_last(x: &Tensor) -> Result<Tensor, ModelError> {
    Ok(candle_nn::ops::softmax(x, D::Minus1)?)
}

#[derive(Debug, Clone)]
pub struct MultiHeadAttention {
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub output: Linear,
    pub heads: usize,
}

fn split_heads(x: &Tensor, heads: usize) -> Result<Tensor, ModelError> {
    let (b, t, d) = x.dims3()?;
    Ok(x.reshape((b, t, heads, d / heads))?.transpose(1, 2)?.contiguous()?)
}

fn merge_heads(x: &Tensor) -> Result<Tensor, ModelError> {
    let (b, h, t, dk) = x.dims4()?;
    Ok(x.transpose(1, 2)?.contiguous()?.reshape((b, t, h * dk))?)
}

impl MultiHeadAttention {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        dim: usize,
        heads: usize,
        bias: bool,
        std: f64,
    ) -> Result<Self, ModelError> {
        Ok(MultiHeadAttention {
            query: Linear::new(store, &format!("{name}.q"), dim, dim, bias, std)?,
            key: Linear::new(store, &format!("{name}.k"), dim, dim, bias, std)?,
            value: Linear::new(store, &format!("{name}.v"), dim, dim, bias, std)?,
            output: Linear::new(store, &format!("{name}.o"), dim, dim, bias, std)?,
            heads,
        })
    }

    /// Attend from `queries` to `keys_values`. `bias` must broadcast to
    /// `(batch, heads, query len, key len)`. Returns the output and the
    /// attention weights.
    pub fn forward(
        &self,
        queries: &Tensor,
        keys_values: &Tensor,
        bias: Option<&Tensor>,
    ) -> Result<(Tensor, Tensor), ModelError> {
        let q = split_heads(&self.query.forward(queries)?, self.heads)?;
        let k = split_heads(&self.key.forward(keys_values)?, self.heads)?;
        let v = split_heads(&self.value.forward(keys_values)?, self.heads)?;
        let dk = q.dim(D::Minus1)?;
        let mut scores = (q.matmul(&k.t()?.contiguous()?)? / (dk as f64).sqrt())?;
        if let Some(b) = bias {
            scores = scores.broadcast_add(b)?;
        }
        let weights = softmax_last(&scores)?;
        let attended = merge_heads(&weights.matmul(&v)?)?;
        Ok((self.output.forward(&attended)?, weights))
    }
}

#[derive(Debug, Clone)]
pub struct FeedForward {
    pub up: Linear,
    pub down: Linear,
}

impl FeedForward {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, hidden: usize, std: f64) -> Result<Self, ModelError> {
        Ok(FeedForward {
            up: Linear::new(store, &format!("{name}.up"), dim, hidden, true, std)?,
            down: Linear::new(store, &format!("{name}.down"), hidden, dim, true, std)?,
        })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, ModelError> {
        self.down.forward(&self.up.forward(x)?.gelu()?)
    }
}

#[derive(Debug, Clone)]
pub struct EncoderLayer {
    pub attention: MultiHeadAttention,
    pub attention_norm: LayerNorm,
    pub ffn: FeedForward,
    pub ffn_norm: LayerNorm,
}

/// Post-norm transformer encoder with learned positions. The token table is
/// shared and passed in at call time.
#[derive(Debug, Clone)]
pub struct Encoder {
    pub positions: Tensor,
    pub embed_norm: LayerNorm,
    pub layers: Vec<EncoderLayer>,
}

impl Encoder {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        dim: usize,
        heads: usize,
        layers: usize,
        max_len: usize,
        std: f64,
    ) -> Result<Self, ModelError> {
        let positions = store.get_or_init(&format!("{name}.pos"), &[max_len, dim], Init::Normal(std))?;
        let embed_norm = LayerNorm::new(store, &format!("{name}.embed_norm"), dim)?;
        let mut out = Vec::with_capacity(layers);
        for l in 0..layers {
            let p = format!("{name}.layers.{l}");
            out.push(EncoderLayer {
                attention: MultiHeadAttention::new(store, &format!("{p}.self_attn"), dim, heads, true, std)?,
                attention_norm: LayerNorm::new(store, &format!("{p}.self_attn_norm"), dim)?,
                ffn: FeedForward::new(store, &format!("{p}.ffn"), dim, 4 * dim, std)?,
                ffn_norm: LayerNorm::new(store, &format!("{p}.ffn_norm"), dim)?,
            });
        }
        Ok(Encoder {
            positions,
            embed_norm,
            layers: out,
        })
    }

    /// `tokens`: embedded input `(batch, time, width)`; `key_bias`:
    /// `(batch, 1, 1, time)` padding bias.
    pub fn forward(&self, tokens: &Tensor, key_bias: &Tensor) -> Result<Tensor, ModelError> {
        let t = tokens.dim(1)?;
        let pos = self.positions.narrow(0, 0, t)?;
        let mut x = self.embed_norm.forward(&tokens.broadcast_add(&pos)?)?;
        for layer in &self.layers {
            let (a, _) = layer.attention.forward(&x, &x, Some(key_bias))?;
            x = layer.attention_norm.forward(&(x + a)?)?;
            let f = layer.ffn.forward(&x)?;
            x = layer.ffn_norm.forward(&(x + f)?)?;
        }
        Ok(x)
    }
}

#[derive(Debug, Clone)]
pub struct DecoderLayer {
    pub self_attention: MultiHeadAttention,
    pub self_norm: LayerNorm,
    pub cross_attention: MultiHeadAttention,
    pub cross_norm: LayerNorm,
    pub ffn: FeedForward,
    pub ffn_norm: LayerNorm,
}

#[derive(Debug, Clone)]
pub struct Decoder {
    pub positions: Tensor,
    pub embed_norm: LayerNorm,
    pub layers: Vec<DecoderLayer>,
}

impl Decoder {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        dim: usize,
        heads: usize,
        layers: usize,
        max_len: usize,
        std: f64,
    ) -> Result<Self, ModelError> {
        let positions = store.get_or_init(&format!("{name}.pos"), &[max_len, dim], Init::Normal(std))?;
        let embed_norm = LayerNorm::new(store, &format!("{name}.embed_norm"), dim)?;
        let mut out = Vec::with_capacity(layers);
        for l in 0..layers {
            let p = format!("{name}.layers.{l}");
            out.push(DecoderLayer {
                self_attention: MultiHeadAttention::new(store, &format!("{p}.self_attn"), dim, heads, true, std)?,
                self_norm: LayerNorm::new(store, &format!("{p}.self_attn_norm"), dim)?,
                cross_attention: MultiHeadAttention::new(store, &format!("{p}.cross_attn"), dim, heads, true, std)?,
                cross_norm: LayerNorm::new(store, &format!("{p}.cross_attn_norm"), dim)?,
                ffn: FeedForward::new(store, &format!("{p}.ffn"), dim, 4 * dim, std)?,
                ffn_norm: LayerNorm::new(store, &format!("{p}.ffn_norm"), dim)?,
            });
        }
        Ok(Decoder {
            positions,
            embed_norm,
            layers: out,
        })
    }

    /// Top-layer hidden states for every decoder input position.
    pub fn forward(&self, tokens: &Tensor, memory: &Tensor, memory_bias: &Tensor) -> Result<Tensor, ModelError> {
        let t = tokens.dim(1)?;
        let pos = self.positions.narrow(0, 0, t)?;
        let causal = causal_bias(t, tokens.dtype(), tokens.device())?;
        let mut x = self.embed_norm.forward(&tokens.broadcast_add(&pos)?)?;
        for layer in &self.layers {
            let (a, _) = layer.self_attention.forward(&x, &x, Some(&causal))?;
            x = layer.self_norm.forward(&(x + a)?)?;
            let (c, _) = layer.cross_attention.forward(&x, memory, Some(memory_bias))?;
            x = layer.cross_norm.forward(&(x + c)?)?;
            let f = layer.ffn.forward(&x)?;
            x = layer.ffn_norm.forward(&(x + f)?)?;
        }
        Ok(x)
    }
}

/// `(1, 1, t, t)` bias hiding future positions.
pub fn causal_bias(t: usize, dtype: DType, device: &Device) -> Result<Tensor, ModelError> {
    let mut data = vec![0f64; t * t];
    for i in 0..t {
        for j in (i + 1)..t {
            data[i * t + j] = MASK_VALUE;
        }
    }
    Ok(Tensor::from_vec(data, (1, 1, t, t), device)?.to_dtype(dtype)?)
}

/// `(batch, 1, 1, time)` bias from per-row valid lengths.
pub fn padding_bias(lengths: &[usize], time: usize, dtype: DType, device: &Device) -> Result<Tensor, ModelError> {
    let mut data = vec![0f64; lengths.len() * time];
    for (b, &len) in lengths.iter().enumerate() {
        for j in len..time {
            data[b * time + j] = MASK_VALUE;
        }
    }
    Ok(Tensor::from_vec(data, (lengths.len(), 1, 1, time), device)?.to_dtype(dtype)?)
}
