//! A single-layer Elman recognizer trained from scratch.
//!
//! `h_t = tanh(W_in x_t + W_rec h_{t-1} + b_h)` with one-hot inputs and
//! `h_0 = 0`; the two class logits are read from the hidden state at each
//! sequence's last symbol, `W_out h_L + b_out`. All arithmetic is `f64`.

mod checkpoint;
mod optim;
mod rnn;

pub use checkpoint::{Checkpoint, CheckpointError, CHECKPOINT_FORMAT};
pub use optim::{amsgrad_step, amsgrad_update, lr_at, AmsgradState};
pub use rnn::{backward, forward, loss, predict, softmax, Batch, ForwardTrace};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{domain, stream};

/// Trainable parameters, all matrices row-major.
///
/// Shapes: `w_in` hidden × alphabet, `w_rec` hidden × hidden, `b_h` hidden,
/// `w_out` 2 × hidden, `b_out` 2. The same type carries gradients and
/// optimizer moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnParams {
    pub alphabet_size: usize,
    pub hidden: usize,
    pub w_in: Vec<f64>,
    pub w_rec: Vec<f64>,
    pub b_h: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: Vec<f64>,
}

impl RnnParams {
    pub fn zeros(alphabet_size: usize, hidden: usize) -> Self {
        Self {
            alphabet_size,
            hidden,
            w_in: vec![0.0; hidden * alphabet_size],
            w_rec: vec![0.0; hidden * hidden],
            b_h: vec![0.0; hidden],
            w_out: vec![0.0; 2 * hidden],
            b_out: vec![0.0; 2],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.alphabet_size, self.hidden)
    }

    /// Parameter blocks in checkpoint order: W_in, W_rec, b_h, W_out, b_out.
    pub fn blocks(&self) -> [&[f64]; 5] {
        [&self.w_in, &self.w_rec, &self.b_h, &self.w_out, &self.b_out]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 5] {
        [
            &mut self.w_in,
            &mut self.w_rec,
            &mut self.b_h,
            &mut self.w_out,
            &mut self.b_out,
        ]
    }

    /// Whether block `i` of [`Self::blocks`] is a weight matrix (L2-penalized).
    pub fn is_weight_block(i: usize) -> bool {
        matches!(i, 0 | 1 | 3)
    }

    pub fn n_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    /// All entries concatenated in block order.
    pub fn flatten(&self) -> Vec<f64> {
        self.blocks().concat()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    pub fn shape_matches(&self, other: &Self) -> bool {
        self.alphabet_size == other.alphabet_size && self.hidden == other.hidden
    }

    /// Sum of squared weight-matrix entries (biases excluded).
    pub fn weight_sq_sum(&self) -> f64 {
        self.blocks()
            .iter()
            .enumerate()
            .filter(|(i, _)| Self::is_weight_block(*i))
            .flat_map(|(_, b)| b.iter())
            .map(|x| x * x)
            .sum()
    }

    pub(crate) fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Xavier-uniform weights, zero biases, reproducible from `seed`.
pub fn init_params(alphabet_size: usize, hidden: usize, seed: u64) -> RnnParams {
    assert!(alphabet_size >= 1 && hidden >= 1);
    let mut p = RnnParams::zeros(alphabet_size, hidden);
    let mut rng = stream(seed, domain::INIT, 0);
    let mut fill = |w: &mut [f64], fan_in: usize, fan_out: usize| {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for x in w {
            *x = rng.gen_range(-bound..bound);
        }
    };
    fill(&mut p.w_in, alphabet_size, hidden);
    fill(&mut p.w_rec, hidden, hidden);
    fill(&mut p.w_out, hidden, 2);
    p
}

/// Euclidean norm over every trainable entry, biases included.
pub fn param_l2_norm(params: &RnnParams) -> f64 {
    params
        .blocks()
        .iter()
        .flat_map(|b| b.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// Training hyperparameters. Defaults are the full-scale settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub hidden: usize,
    pub batch: usize,
    pub steps: usize,
    pub lr_peak: f64,
    pub lr_start: f64,
    pub warmup_fraction: f64,
    pub l2_weight: f64,
    pub train_min_len: usize,
    pub train_max_len: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 256,
            batch: 256,
            steps: 100_000,
            lr_peak: 1e-3,
            lr_start: 1e-8,
            warmup_fraction: 0.2,
            l2_weight: 5e-4,
            train_min_len: 2,
            train_max_len: 64,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.hidden == 0 || self.batch == 0 || self.steps == 0 {
            return Err("hidden, batch and steps must be positive".into());
        }
        if !(self.lr_peak > 0.0 && self.lr_start > 0.0) {
            return Err("learning rates must be positive".into());
        }
        if !(self.warmup_fraction > 0.0 && self.warmup_fraction <= 1.0) {
            return Err(format!("warmup_fraction must be in (0, 1], got {}", self.warmup_fraction));
        }
        if self.l2_weight < 0.0 {
            return Err("l2_weight must be non-negative".into());
        }
        if self.train_min_len < 2 || self.train_min_len > self.train_max_len {
            return Err(format!(
                "need 2 <= train_min_len <= train_max_len, got {}..={}",
                self.train_min_len, self.train_max_len
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return Err("need beta1, beta2 in [0, 1) and epsilon > 0".into());
        }
        Ok(())
    }
}
