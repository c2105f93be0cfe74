use std::path::{Path, PathBuf};

use omega_lab::experiment::Balance;
use omega_lab::{EvalConfig, SamplerConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA: &str = "omega-lab-config/v1";

/// Shown under `--help` for every subcommand that reads a config file.
pub const CONFIG_KEYS: &str = "\
CONFIG FILE (JSON, schema \"omega-lab-config/v1\"; unknown keys are rejected, flags override file values)
  schema                            must be \"omega-lab-config/v1\" if present
  automaton                         HOA path or fixture:NAME
  out_dir                           root for runs/, datasets/ and reports/  [default: .]
  seeds                             list of training seeds, one run each  [default: [train.seed]]
  sampler.min_len                   shortest encoded length for `sample`  [default: 2]
  sampler.max_len                   longest encoded length for `sample`  [default: 64]
  sampler.target_positive_fraction  share of accepted words in balanced batches  [default: 0.5]
  sampler.oversample_factor         candidates per class target, times batch size  [default: 4]
  sampler.max_resample_attempts     restarts before a draw counts as a dead end  [default: 100]
  sampler.mode                      uniform | balanced, also the training-batch mode  [default: balanced]
  sampler.seed                      dataset seed for `sample`  [default: 0]
  train.hidden                      RNN hidden units  [default: 256]
  train.batch                       sequences per optimizer step  [default: 256]
  train.steps                       optimizer steps  [default: 100000]
  train.lr_peak                     learning rate after warmup  [default: 0.001]
  train.lr_start                    learning rate at step 0  [default: 1e-8]
  train.warmup_fraction             share of steps spent warming up  [default: 0.2]
  train.l2_weight                   L2 penalty on weight matrices  [default: 0.0005]
  train.train_min_len               shortest training sequence  [default: 2]
  train.train_max_len               longest training sequence; ID/OOD boundary  [default: 64]
  train.beta1, train.beta2          AMSGrad moment decay  [default: 0.9, 0.999]
  train.epsilon                     AMSGrad denominator offset  [default: 1e-8]
  train.seed                        training seed when `seeds` is absent  [default: 0]
  eval.min_len, eval.max_len        test-grid lengths  [default: 2, 512]
  eval.per_length_count             test sequences per length  [default: 512]
  eval.mode                         uniform | balanced test sampling  [default: balanced]
  eval.seed                         test-grid seed  [default: 0]
  eval.validation_count             validation-set size  [default: 1024]
  eval.validation_len               validation sequence length  [default: 512]
  eval.validation_interval          steps between validations  [default: 250]

ENVIRONMENT
  OMEGA_LAB_THREADS                 worker threads; unset means one per core
";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema: String,
    pub automaton: Option<String>,
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    pub sampler: SamplerConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA.into(),
            automaton: None,
            out_dir: PathBuf::from("."),
            seeds: None,
            sampler: SamplerConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path` (or the defaults), applies `overrides` of the form
    /// `section.key=value`, and checks the result against the schema.
    /// Values are parsed as JSON and fall back to plain strings.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut value = match path {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
                let v: Value = serde_json::from_str(&text).map_err(|e| located(path, &e))?;
                // surface unknown keys with the file position
                serde_json::from_str::<Self>(&text).map_err(|e| located(path, &e))?;
                v
            }
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| CliError::config(format!("configuration: {e}")))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::config(format!("unsupported schema {:?}, expected {SCHEMA:?}", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn balance(&self) -> Balance {
        Balance {
            target_positive_fraction: self.sampler.target_positive_fraction,
            oversample_factor: self.sampler.oversample_factor,
            max_resample_attempts: self.sampler.max_resample_attempts,
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| vec![self.train.seed])
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.sampler.validate().map_err(|e| CliError::config(e.to_string()))?;
        self.train.validate().map_err(CliError::config)?;
        self.eval.validate().map_err(CliError::config)?;
        if self.seeds.as_ref().is_some_and(Vec::is_empty) {
            return Err(CliError::config("seeds must not be empty"));
        }
        Ok(())
    }
}

fn located(path: &Path, e: &serde_json::Error) -> CliError {
    CliError::config(format!("{}:{}:{}: {}", path.display(), e.line(), e.column(), strip_position(&e.to_string())))
}

fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override {spec:?} is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::config(format!("override {key:?}: {part:?} is not inside a section")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}
