use serde::{Deserialize, Serialize};

use super::{RnnParams, TrainConfig};

/// Linear warmup from `lr_start` at step 0 to `lr_peak` at step
/// `⌊warmup_fraction · steps⌋`, then constant.
pub fn lr_at(step: usize, cfg: &TrainConfig) -> f64 {
    let warm = (cfg.warmup_fraction * cfg.steps as f64).floor() as usize;
    if step >= warm {
        return cfg.lr_peak;
    }
    cfg.lr_start + (cfg.lr_peak - cfg.lr_start) * step as f64 / warm as f64
}

/// AMSGrad moment accumulators, shaped like the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmsgradState {
    pub m: RnnParams,
    pub v: RnnParams,
    pub v_hat: RnnParams,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AmsgradState {
    pub fn new(params: &RnnParams, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            v_hat: params.zeros_like(),
            t: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn for_config(params: &RnnParams, cfg: &TrainConfig) -> Self {
        Self::new(params, cfg.beta1, cfg.beta2, cfg.epsilon)
    }
}

/// One AMSGrad update on flat slices, without bias correction:
///
/// ```text
/// m ← β₁m + (1-β₁)g
/// v ← β₂v + (1-β₂)g²
/// v̂ ← max(v̂, v)
/// θ ← θ - lr · m / (√v̂ + ε)
/// ```
#[allow(clippy::too_many_arguments)]
pub fn amsgrad_update(
    theta: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    v_hat: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
) {
    for i in 0..theta.len() {
        let g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        v_hat[i] = v_hat[i].max(v[i]);
        theta[i] -= lr * m[i] / (v_hat[i].sqrt() + epsilon);
    }
}

pub fn amsgrad_step(params: &mut RnnParams, grads: &RnnParams, state: &mut AmsgradState, lr: f64) {
    assert!(params.shape_matches(grads) && params.shape_matches(&state.m));
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let g = grads.blocks();
    let theta = params.blocks_mut();
    let m = state.m.blocks_mut();
    let v = state.v.blocks_mut();
    let vh = state.v_hat.blocks_mut();
    for ((((th, gb), mb), vb), vhb) in theta.into_iter().zip(g).zip(m).zip(v).zip(vh) {
        amsgrad_update(th, gb, mb, vb, vhb, lr, b1, b2, eps);
    }
    state.t += 1;
}
