use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AmsgradState, RnnParams, TrainConfig};

pub const CHECKPOINT_FORMAT: &str = "omega-lab-checkpoint/v1";

/// Training state on disk.
///
/// Parameters are stored as row-major arrays in the order W_in, W_rec,
/// b_h, W_out, b_out. Batches are drawn from streams addressed by
/// `(train_seed, step)`, so `(train_seed, step)` is the whole generator state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub config: TrainConfig,
    pub step: usize,
    pub params: RnnParams,
    pub optimizer: AmsgradState,
    pub rng: RngState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automaton_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub train_seed: u64,
    pub next_step: usize,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported checkpoint format {found:?} (expected {CHECKPOINT_FORMAT:?})")]
    Format { found: String },
    #[error("inconsistent checkpoint: {0}")]
    Shape(String),
}

impl Checkpoint {
    pub fn new(config: TrainConfig, step: usize, params: RnnParams, optimizer: AmsgradState, train_seed: u64) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            config,
            step,
            params,
            optimizer,
            rng: RngState {
                train_seed,
                next_step: step,
            },
            automaton_sha256: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let ck: Self = serde_json::from_str(text)?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(CheckpointError::Format { found: ck.format });
        }
        let p = &ck.params;
        let (h, a) = (p.hidden, p.alphabet_size);
        let shapes = [h * a, h * h, h, 2 * h, 2];
        for (i, (block, want)) in p.blocks().iter().zip(shapes).enumerate() {
            if block.len() != want {
                return Err(CheckpointError::Shape(format!(
                    "parameter block {i} has {} entries, expected {want}",
                    block.len()
                )));
            }
        }
        for s in [&ck.optimizer.m, &ck.optimizer.v, &ck.optimizer.v_hat] {
            if !s.shape_matches(p) || s.n_params() != p.n_params() {
                return Err(CheckpointError::Shape("optimizer state shape differs from parameters".into()));
            }
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::init_params;

    #[test]
    fn json_round_trip_is_exact() {
        let p = init_params(5, 4, 7);
        let cfg = TrainConfig::default();
        let opt = AmsgradState::for_config(&p, &cfg);
        let ck = Checkpoint::new(cfg, 12, p, opt, 99);
        let back = Checkpoint::from_json(&ck.to_json()).unwrap();
        assert_eq!(back, ck);
        assert!(ck.to_json().contains(CHECKPOINT_FORMAT));
    }

    #[test]
    fn rejects_foreign_format_and_bad_shapes() {
        let p = init_params(3, 2, 1);
        let opt = AmsgradState::new(&p, 0.9, 0.999, 1e-8);
        let mut ck = Checkpoint::new(TrainConfig::default(), 0, p, opt, 0);
        ck.format = "something/v0".into();
        assert!(matches!(Checkpoint::from_json(&ck.to_json()), Err(CheckpointError::Format { .. })));
        ck.format = CHECKPOINT_FORMAT.into();
        ck.params.b_out.push(1.0);
        assert!(matches!(Checkpoint::from_json(&ck.to_json()), Err(CheckpointError::Shape(_))));
    }
}
