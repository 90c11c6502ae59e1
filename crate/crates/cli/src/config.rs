//! Effective configuration: defaults, then a TOML file, then environment
//! variables, then command-line flags.

use std::path::Path;

use eventstory_model::{GenerationConfig, ModelConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

/// Environment variables of the form `EVENTSTORY__SECTION__KEY` override
/// `section.key`.
pub const ENV_PREFIX: &str = "EVENTSTORY__";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Words seen fewer times in training map to `<unk>`.
    pub min_count: usize,
    /// Width of the hashed bag-of-words sentence vectors used for
    /// similarity targets when no word vectors are given.
    pub hashed_dim: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            min_count: 1,
            hashed_dim: 256,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub generation: GenerationConfig,
    pub data: DataConfig,
}

impl PipelineConfig {
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }

    /// One seed drives initialization, shuffling and sampling.
    pub fn set_seed(&mut self, seed: u64) {
        self.model.seed = seed;
        self.train.seed = seed;
        self.generation.seed = seed;
    }
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parse a scalar as TOML when possible, else keep it as a string.
fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_dotted(table: &mut Table, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed key '{key}'")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::Config(format!("'{p}' in '{key}' is not a section"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Dotted keys from `EVENTSTORY__SECTION__KEY=value` variables.
pub fn env_overrides(vars: impl Iterator<Item = (String, String)>) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = vars
        .filter_map(|(k, v)| {
            k.strip_prefix(ENV_PREFIX)
                .map(|rest| (rest.to_ascii_lowercase().replace("__", "."), v))
        })
        .collect();
    out.sort();
    out
}

pub fn load(
    file: Option<&Path>,
    env: &[(String, String)],
    flags: &[(String, String)],
    seed: Option<u64>,
) -> Result<PipelineConfig, CliError> {
    let mut table = Table::try_from(PipelineConfig::default()).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|_| CliError::MissingInput(path.to_path_buf()))?;
        let over: Table = toml::from_str(&text).map_err(|e| CliError::InvalidInput {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        merge(&mut table, over);
    }
    for (k, v) in env.iter().chain(flags) {
        set_dotted(&mut table, k, parse_value(v))?;
    }
    let mut cfg: PipelineConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    if let Some(seed) = seed {
        cfg.set_seed(seed);
    }
    // vocab_size 0 means "take it from the vocabulary", known only later
    let mut shape = cfg.model.clone();
    if shape.vocab_size == 0 {
        shape.vocab_size = eventstory_model::vocab::special_tokens().len();
    }
    shape.validate()?;
    cfg.train.validate()?;
    cfg.generation.validate()?;
    Ok(cfg)
}

/// Split `key=value` flags.
pub fn parse_sets(raw: &[String]) -> Result<Vec<(String, String)>, CliError> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got '{s}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(k: &str, v: &str) -> (String, String) {
        (k.to_string(), v.to_string())
    }

    #[test]
    fn later_layers_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[train]\nlambda = 0.5\nbatch_size = 8\n[model]\nnum_layers = 2\n").unwrap();
        let env = vec![kv("train.lambda", "0.3"), kv("model.num_heads", "4")];
        let flags = vec![kv("train.lambda", "0.0")];
        let cfg = load(Some(&path), &env, &flags, Some(7)).unwrap();
        assert_eq!(cfg.train.lambda, 0.0);
        assert_eq!(cfg.train.batch_size, 8);
        assert_eq!(cfg.model.num_layers, 2);
        assert_eq!(cfg.model.num_heads, 4);
        assert_eq!((cfg.model.seed, cfg.train.seed, cfg.generation.seed), (7, 7, 7));
        // untouched fields keep their defaults
        assert_eq!(cfg.train.learning_rate, 8e-5);
    }

    #[test]
    fn environment_names_map_to_dotted_keys() {
        let vars = vec![
            kv("EVENTSTORY__MODEL__ABLATIONS__DISABLE_CM", "true"),
            kv("EVENTSTORY_ROC_DIR", "/data"),
            kv("PATH", "/bin"),
        ];
        let got = env_overrides(vars.into_iter());
        assert_eq!(got, vec![kv("model.ablations.disable_cm", "true")]);
        let cfg = load(None, &got, &[], None).unwrap();
        assert!(cfg.model.ablations.disable_cm);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(matches!(load(None, &[], &[kv("train.lamda", "0.1")], None), Err(CliError::Config(_))));
        assert!(matches!(load(None, &[], &[kv("train.lambda", "2.0")], None), Err(CliError::Model(_))));
        assert!(parse_sets(&["novalue".into()]).is_err());
    }
}
