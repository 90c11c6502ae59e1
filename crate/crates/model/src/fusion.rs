//! Context-to-event fusion: event features attend over context features
//! and the result is added back with a residual scale.

use candle_core::Tensor;

use crate::layers::MultiHeadAttention;
use crate::params::{Init, ParamStore};
use crate::ModelError;

pub const BETA_PARAM: &str = "fusion.beta";

#[derive(Debug, Clone)]
pub enum Beta {
    Fixed(f64),
    /// A one-element trainable tensor.
    Trainable(Tensor),
}

impl Beta {
    pub fn value(&self) -> Result<f64, ModelError> {
        match self {
            Beta::Fixed(b) => Ok(*b),
            Beta::Trainable(t) => Ok(t.to_dtype(candle_core::DType::F64)?.flatten_all()?.to_vec1::<f64>()?[0]),
        }
    }
}

/// Feature tensors flowing from the encoders to the decoder memory. Absent
/// entries belong to modules removed by an ablation.
#[derive(Debug, Clone)]
pub struct FusionBundle {
    pub context: Option<Tensor>,
    pub events: Option<Tensor>,
    /// Cross-attended context features, one row per event token.
    pub attended: Option<Tensor>,
    /// Events plus the scaled attended context.
    pub contextualized: Option<Tensor>,
    /// Decoder memory: context rows first, then event rows.
    pub memory: Tensor,
    /// `(batch, heads, event len, context len)`.
    pub attention: Option<Tensor>,
}

/// Queries come from the event features; keys and values from the context.
/// Projections carry no bias.
#[derive(Debug, Clone)]
pub struct ContextualizingModule {
    pub attention: MultiHeadAttention,
    pub beta: Beta,
}

impl ContextualizingModule {
    pub fn new(
        store: &mut ParamStore,
        dim: usize,
        heads: usize,
        beta: f64,
        trainable_beta: bool,
        std: f64,
    ) -> Result<Self, ModelError> {
        let attention = MultiHeadAttention::new(store, "fusion", dim, heads, false, std)?;
        let beta = if trainable_beta {
            Beta::Trainable(store.get_or_init(BETA_PARAM, &[1], Init::Constant(beta))?)
        } else {
            Beta::Fixed(beta)
        };
        Ok(ContextualizingModule { attention, beta })
    }

    /// Attended context features and the attention weights.
    pub fn cross_attend(
        &self,
        events: &Tensor,
        context: &Tensor,
        context_bias: &Tensor,
    ) -> Result<(Tensor, Tensor), ModelError> {
        self.attention.forward(events, context, Some(context_bias))
    }

    pub fn contextualize(&self, events: &Tensor, attended: &Tensor) -> Result<Tensor, ModelError> {
        match &self.beta {
            Beta::Fixed(b) => contextualize(events, attended, *b),
            Beta::Trainable(t) => Ok(events.broadcast_add(&attended.broadcast_mul(t)?)?),
        }
    }
}

/// `events + beta * attended`, elementwise.
pub fn contextualize(events: &Tensor, attended: &Tensor, beta: f64) -> Result<Tensor, ModelError> {
    if events.dims() != attended.dims() {
        return Err(ModelError::Shape(format!(
            "event features {:?} vs attended features {:?}",
            events.dims(),
            attended.dims()
        )));
    }
    Ok((events + (attended * beta)?)?)
}

/// Concatenate along the sequence axis, context rows first.
pub fn fuse(context: &Tensor, contextualized: &Tensor) -> Result<Tensor, ModelError> {
    Ok(Tensor::cat(&[context, contextualized], 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use candle_core::{DType, Device};

    #[test]
    fn residual_arithmetic() {
        let dev = Device::Cpu;
        let ones = Tensor::ones((2, 4), DType::F32, &dev).unwrap();
        let out: Vec<Vec<f32>> = contextualize(&ones, &ones, 0.1).unwrap().to_vec2().unwrap();
        assert!(out.iter().flatten().all(|v| (*v - 1.1).abs() < 1e-6));
        let zero = contextualize(&ones, &ones, 0.0).unwrap();
        assert_eq!(zero.to_vec2::<f32>().unwrap(), ones.to_vec2::<f32>().unwrap());
        let bad = Tensor::ones((3, 4), DType::F32, &dev).unwrap();
        assert!(contextualize(&ones, &bad, 0.1).is_err());
    }
}
