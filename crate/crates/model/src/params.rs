//! Named trainable tensors with deterministic initialization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use candle_core::{DType, Device, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::ModelError;

/// How a fresh parameter is filled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    Normal(f64),
    Zeros,
    Ones,
    Constant(f64),
}

/// The name a parameter is seeded under. Both encoders are seeded as one
/// shared base encoder so that they start from the same weights, the way
/// they would when restored from a single pretrained checkpoint.
pub fn seed_name(name: &str) -> String {
    for prefix in ["encoder_c.", "encoder_e."] {
        if let Some(rest) = name.strip_prefix(prefix) {
            return format!("encoder.{rest}");
        }
    }
    name.to_string()
}

fn stream_seed(seed: u64, name: &str) -> u64 {
    let digest = Sha256::new()
        .chain_update(seed.to_le_bytes())
        .chain_update(seed_name(name).as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Values for one parameter. Depends only on (seed, seed name, shape), never
/// on which other parameters exist.
pub fn init_values(seed: u64, name: &str, shape: &[usize], init: Init) -> Vec<f64> {
    let n: usize = shape.iter().product();
    match init {
        Init::Zeros => vec![0.0; n],
        Init::Ones => vec![1.0; n],
        Init::Constant(c) => vec![c; n],
        Init::Normal(std) => {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, name));
            let dist = Normal::new(0.0, std).expect("finite std");
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamStore {
    vars: BTreeMap<String, Var>,
    /// Names requested through `get_or_init`.
    requested: BTreeSet<String>,
    dtype: DType,
    device: Device,
    seed: u64,
}

impl ParamStore {
    pub fn new(seed: u64, dtype: DType, device: Device) -> Self {
        ParamStore {
            vars: BTreeMap::new(),
            requested: BTreeSet::new(),
            dtype,
            device,
            seed,
        }
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    /// Create the parameter if absent and return it.
    pub fn get_or_init(&mut self, name: &str, shape: &[usize], init: Init) -> Result<Tensor, ModelError> {
        self.requested.insert(name.to_string());
        if let Some(v) = self.vars.get(name) {
            if v.dims() != shape {
                return Err(ModelError::Shape(format!(
                    "parameter {name} has shape {:?}, expected {shape:?}",
                    v.dims()
                )));
            }
            return Ok(v.as_tensor().clone());
        }
        let data = init_values(self.seed, name, shape, init);
        let t = Tensor::from_vec(data, shape, &self.device)?.to_dtype(self.dtype)?;
        let var = Var::from_tensor(&t)?;
        let out = var.as_tensor().clone();
        self.vars.insert(name.to_string(), var);
        Ok(out)
    }

    /// Stored parameters nobody asked for.
    pub fn unrequested(&self) -> Vec<String> {
        self.vars
            .keys()
            .filter(|k| !self.requested.contains(*k))
            .cloned()
            .collect()
    }

    pub fn get(&self, name: &str) -> Result<Tensor, ModelError> {
        self.vars
            .get(name)
            .map(|v| v.as_tensor().clone())
            .ok_or_else(|| ModelError::MissingParameter(name.to_string()))
    }

    pub fn var(&self, name: &str) -> Option<&Var> {
        self.vars.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Total number of scalar weights.
    pub fn count(&self) -> usize {
        self.vars.values().map(|v| v.elem_count()).sum()
    }

    pub fn count_with_prefix(&self, prefix: &str) -> usize {
        self.vars
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, v)| v.elem_count())
            .sum()
    }

    /// Vars in name order, excluding any whose name is in `frozen`.
    pub fn trainable(&self, frozen: &[&str]) -> Vec<Var> {
        self.vars
            .iter()
            .filter(|(k, _)| !frozen.contains(&k.as_str()))
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// Overwrite an existing parameter's value in place.
    pub fn set(&self, name: &str, value: &Tensor) -> Result<(), ModelError> {
        let var = self
            .vars
            .get(name)
            .ok_or_else(|| ModelError::MissingParameter(name.to_string()))?;
        if var.dims() != value.dims() {
            return Err(ModelError::Shape(format!(
                "cannot set {name}: shape {:?} vs {:?}",
                value.dims(),
                var.dims()
            )));
        }
        var.set(&value.to_dtype(self.dtype)?)?;
        Ok(())
    }

    /// Deep copy of every value, detached from the autograd graph.
    pub fn snapshot(&self) -> Result<BTreeMap<String, Tensor>, ModelError> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.vars {
            out.insert(k.clone(), v.as_detached_tensor().copy()?);
        }
        Ok(out)
    }

    /// Restore values from a snapshot with exactly the same names.
    pub fn restore(&self, values: &BTreeMap<String, Tensor>) -> Result<(), ModelError> {
        for name in self.vars.keys() {
            if !values.contains_key(name) {
                return Err(ModelError::MissingParameter(name.clone()));
            }
        }
        for (k, t) in values {
            self.set(k, t)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let map: HashMap<String, Tensor> = self
            .vars
            .iter()
            .map(|(k, v)| (k.clone(), v.as_detached_tensor()))
            .collect();
        candle_core::safetensors::save(&map, path)?;
        Ok(())
    }

    /// Load tensors saved with [`ParamStore::save`].
    pub fn load(path: &Path, seed: u64, dtype: DType, device: Device) -> Result<Self, ModelError> {
        let map = candle_core::safetensors::load(path, &device).map_err(|e| ModelError::Checkpoint {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut store = ParamStore::new(seed, dtype, device);
        let mut names: Vec<_> = map.keys().cloned().collect();
        names.sort();
        for name in names {
            let t = map[&name].to_dtype(dtype)?;
            store.vars.insert(name, Var::from_tensor(&t)?);
        }
        Ok(store)
    }

    /// Insert an already-built tensor as a fresh parameter.
    pub fn insert(&mut self, name: &str, value: &Tensor) -> Result<(), ModelError> {
        let t = value.to_dtype(self.dtype)?.copy()?;
        self.vars.insert(name.to_string(), Var::from_tensor(&t)?);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_depends_only_on_seed_and_name() {
        let a = init_values(42, "decoder.l0.w", &[3, 2], Init::Normal(0.02));
        let b = init_values(42, "decoder.l0.w", &[3, 2], Init::Normal(0.02));
        let c = init_values(43, "decoder.l0.w", &[3, 2], Init::Normal(0.02));
        assert_eq!(a, b);
        assert_ne!(a, c);
        // both encoders share a base init
        assert_eq!(
            init_values(42, "encoder_c.l0.w", &[4], Init::Normal(1.0)),
            init_values(42, "encoder_e.l0.w", &[4], Init::Normal(1.0))
        );
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ParamStore::new(7, DType::F32, Device::Cpu);
        s.get_or_init("a.w", &[2, 3], Init::Normal(1.0)).unwrap();
        s.get_or_init("a.b", &[3], Init::Zeros).unwrap();
        let path = dir.path().join("p.safetensors");
        s.save(&path).unwrap();
        let l = ParamStore::load(&path, 7, DType::F32, Device::Cpu).unwrap();
        assert_eq!(l.names().collect::<Vec<_>>(), vec!["a.b", "a.w"]);
        let x: Vec<Vec<f32>> = s.get("a.w").unwrap().to_vec2().unwrap();
        let y: Vec<Vec<f32>> = l.get("a.w").unwrap().to_vec2().unwrap();
        assert_eq!(x, y);
        assert_eq!(l.count(), 9);
    }
}
