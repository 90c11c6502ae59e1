//! Language-modelling and sentence-similarity objectives.

use candle_core::{DType, Tensor, D};

use crate::config::SentLossForm;
use crate::ModelError;

/// Mean negative log-likelihood over the unmasked target tokens.
///
/// `logits`: `(batch, time, vocab)`; `targets`: `(batch, time)` u32;
/// `mask`: `(batch, time)` with 1 for real tokens, in the logits dtype.
pub fn lm_loss(logits: &Tensor, targets: &Tensor, mask: &Tensor) -> Result<Tensor, ModelError> {
    let (total, count) = lm_loss_sum(logits, targets, mask)?;
    if count == 0.0 {
        return Err(ModelError::EmptyTarget);
    }
    Ok((total / count)?)
}

/// Summed NLL and the token count, for corpus-level perplexity.
pub fn lm_loss_sum(logits: &Tensor, targets: &Tensor, mask: &Tensor) -> Result<(Tensor, f64), ModelError> {
    let (b, t, v) = logits.dims3()?;
    let logp = candle_nn::ops::log_softmax(&logits.reshape((b * t, v))?, D::Minus1)?;
    let picked = logp.gather(&targets.reshape((b * t, 1))?, 1)?.reshape((b, t))?;
    let total = (picked * mask)?.sum_all()?.neg()?;
    let count = mask.to_dtype(DType::F64)?.sum_all()?.to_scalar::<f64>()?;
    Ok((total, count))
}

/// Mean over all `m * m` cells of the margin-bounded absolute error.
pub fn sent_loss(target: &Tensor, prediction: &Tensor, delta: f64, form: SentLossForm) -> Result<Tensor, ModelError> {
    if target.dims() != prediction.dims() {
        return Err(ModelError::Shape(format!(
            "similarity target {:?} vs prediction {:?}",
            target.dims(),
            prediction.dims()
        )));
    }
    let diff = (target - prediction)?.abs()?;
    // The mask is a constant, so gradients flow only through active cells.
    let active = diff.detach().ge(delta)?.to_dtype(diff.dtype())?;
    let cells = match form {
        SentLossForm::Floor => {
            let floor = ((active.ones_like()? - &active)? * delta)?;
            ((&diff * &active)? + floor)?
        }
        SentLossForm::Hinge => ((&diff - delta)? * &active)?,
    };
    Ok(cells.mean_all()?)
}

pub fn overall_loss(lm: &Tensor, sent: Option<&Tensor>, lambda: f64) -> Result<Tensor, ModelError> {
    Ok(match sent {
        Some(s) => (lm + (s * lambda)?)?,
        None => lm.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use candle_core::{Device, Var};

    fn t2(rows: &[[f64; 2]; 2]) -> Tensor {
        Tensor::new(rows, &Device::Cpu).unwrap()
    }

    #[test]
    fn hand_probabilities() {
        // log-probabilities are the logits themselves once they normalize
        let probs = [[0.5f64, 0.5, 0.0], [0.25, 0.75, 0.0], [0.125, 0.0, 0.875]];
        let logits: Vec<f64> = probs.iter().flatten().map(|p| if *p == 0.0 { -1e9 } else { p.ln() }).collect();
        let logits = Tensor::from_vec(logits, (1, 3, 3), &Device::Cpu).unwrap();
        let targets = Tensor::new(&[[0u32, 0, 0]], &Device::Cpu).unwrap();
        let mask = Tensor::ones((1, 3), DType::F64, &Device::Cpu).unwrap();
        let l = lm_loss(&logits, &targets, &mask).unwrap().to_scalar::<f64>().unwrap();
        let expected = -(0.5f64.ln() + 0.25f64.ln() + 0.125f64.ln()) / 3.0;
        assert!((l - expected).abs() < 1e-12);
        let empty = Tensor::zeros((1, 3), DType::F64, &Device::Cpu).unwrap();
        assert!(matches!(lm_loss(&logits, &targets, &empty), Err(ModelError::EmptyTarget)));
    }

    #[test]
    fn uniform_model_costs_log_vocab() {
        let logits = Tensor::zeros((2, 3, 7), DType::F64, &Device::Cpu).unwrap();
        let targets = Tensor::new(&[[1u32, 2, 3], [4, 5, 6]], &Device::Cpu).unwrap();
        let mask = Tensor::ones((2, 3), DType::F64, &Device::Cpu).unwrap();
        let l = lm_loss(&logits, &targets, &mask).unwrap().to_scalar::<f64>().unwrap();
        assert!((l - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn floor_and_hinge_cells() {
        let s = t2(&[[1.0, 0.2], [0.2, 1.0]]);
        let y = t2(&[[0.95, 0.4], [0.0, 1.05]]);
        // |diff| = 0.05, 0.2, 0.2, 0.05
        let floor = sent_loss(&s, &y, 0.1, SentLossForm::Floor).unwrap().to_scalar::<f64>().unwrap();
        assert!((floor - 0.15).abs() < 1e-12);
        let hinge = sent_loss(&s, &y, 0.1, SentLossForm::Hinge).unwrap().to_scalar::<f64>().unwrap();
        assert!((hinge - 0.05).abs() < 1e-12);
        let same = sent_loss(&s, &s, 0.1, SentLossForm::Floor).unwrap().to_scalar::<f64>().unwrap();
        assert!((same - 0.1).abs() < 1e-15);
        assert!(sent_loss(&s, &Tensor::ones((3, 3), DType::F64, &Device::Cpu).unwrap(), 0.1, SentLossForm::Floor).is_err());
    }

    #[test]
    fn margin_dead_zone_gradient() {
        let s = t2(&[[1.0, 0.2], [0.2, 1.0]]);
        let y = Var::from_tensor(&t2(&[[0.95, 0.4], [0.0, 1.05]])).unwrap();
        let l = sent_loss(&s, &y, 0.1, SentLossForm::Floor).unwrap();
        let g = l.backward().unwrap();
        let g: Vec<Vec<f64>> = g.get(&y).unwrap().to_vec2().unwrap();
        // diff = s - y: +0.05 (dead), -0.2, +0.2, -0.05 (dead); d/dy = -sign(diff)/m^2
        assert_eq!(g, vec![vec![0.0, 0.25], vec![-0.25, 0.0]]);
    }

    #[test]
    fn overall_combination() {
        let lm = Tensor::new(2.0f64, &Device::Cpu).unwrap();
        let sent = Tensor::new(0.3f64, &Device::Cpu).unwrap();
        let o = overall_loss(&lm, Some(&sent), 0.1).unwrap().to_scalar::<f64>().unwrap();
        assert!((o - 2.03).abs() < 1e-12);
        let o = overall_loss(&lm, Some(&sent), 0.0).unwrap().to_scalar::<f64>().unwrap();
        assert_eq!(o, 2.0);
        let o = overall_loss(&lm, None, 0.1).unwrap().to_scalar::<f64>().unwrap();
        assert_eq!(o, 2.0);
    }
}
