use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::eval::{draw, evaluate_range, summarize_id_ood, Balance, Category, EvalConfig, EvalGrid};
use super::ExperimentError;
use crate::automaton::Dba;
use crate::neural::{
    amsgrad_step, backward, forward, init_params, loss, lr_at, param_l2_norm, predict, AmsgradState, Batch,
    Checkpoint, RnnParams, TrainConfig,
};
use crate::rng::{derive_seed, domain};
use crate::sampling::{automaton_sha256, SampleMode, Sampler};

/// Achieved class balance further than this from the target flags a run.
pub const IMBALANCE_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub step: usize,
    pub accuracy: f64,
    pub train_loss: f64,
}

/// Fixed modelling choices, recorded with every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub activation: String,
    pub readout: String,
    pub output: String,
    pub l2: String,
}

impl Default for ModelInfo {
    fn default() -> Self {
        Self {
            activation: "tanh".into(),
            readout: "hidden state at last symbol".into(),
            output: "2 logits, softmax cross-entropy".into(),
            l2: "loss penalty on weight matrices, biases excluded".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfigSnapshot {
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub balance: Balance,
    pub train_mode: SampleMode,
}

/// Everything reported about one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub automaton: String,
    pub n_states: usize,
    pub automaton_sha256: String,
    /// Whether completion added a trap state when the automaton was loaded.
    pub completion_added_state: bool,
    pub seed: u64,
    pub config: RunConfigSnapshot,
    pub model: ModelInfo,
    pub history: Vec<ValidationPoint>,
    pub grid: EvalGrid,
    pub id_accuracy: f64,
    pub ood_accuracy: f64,
    pub category: Category,
    pub param_norm: f64,
    pub final_loss: f64,
    pub train_positive_fraction: f64,
    pub validation_positive_fraction: f64,
    pub test_positive_fraction: f64,
    pub imbalanced: bool,
    /// Accuracy on accepted and on rejected test words; filled for imbalanced runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class_accuracy: Option<(Option<f64>, Option<f64>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    /// Kept out of the JSON so identical runs serialize identically.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

pub struct TrainOutcome {
    pub record: RunRecord,
    pub checkpoint: Checkpoint,
    pub params: RnnParams,
}

/// Identifies the automaton in a run.
#[derive(Debug, Clone)]
pub struct AutomatonInfo {
    pub name: String,
    pub completion_added_state: bool,
}

/// Trains on freshly sampled batches, validates periodically on a fixed set,
/// then scores the full length grid.
///
/// Step `t` draws its batch from `derive_seed(seed, TRAIN_BATCH, t)`; the
/// validation set is drawn once from `derive_seed(seed, VALIDATION, 0)`.
pub fn train_run(
    dba: &Dba,
    info: &AutomatonInfo,
    train: &TrainConfig,
    train_mode: SampleMode,
    balance: &Balance,
    eval: &EvalConfig,
) -> Result<TrainOutcome, ExperimentError> {
    train.validate().map_err(ExperimentError::Config)?;
    eval.validate().map_err(ExperimentError::Config)?;
    if eval.max_len <= train.train_max_len || eval.min_len > train.train_max_len {
        return Err(ExperimentError::Config(format!(
            "evaluation lengths {}..={} must straddle the training maximum {}",
            eval.min_len, eval.max_len, train.train_max_len
        )));
    }
    let started = Instant::now();
    let sampler = Sampler::new(dba, balance.max_resample_attempts)?;
    let seed = train.seed;

    let val = draw(
        &sampler,
        SampleMode::Balanced,
        balance,
        eval.validation_count,
        eval.validation_len,
        eval.validation_len,
        derive_seed(seed, domain::VALIDATION, 0),
    );
    let val_batch = Batch::from_records(&val.records);

    let mut params = init_params(dba.alphabet().size(), train.hidden, seed);
    let mut opt = AmsgradState::for_config(&params, train);
    let mut history = Vec::new();
    let mut pos_sum = 0.0;
    let mut last_loss = f64::NAN;

    for step in 0..train.steps {
        let b = draw(
            &sampler,
            train_mode,
            balance,
            train.batch,
            train.train_min_len,
            train.train_max_len,
            derive_seed(seed, domain::TRAIN_BATCH, step as u64),
        );
        pos_sum += b.stats.achieved_positive_fraction;
        let batch = Batch::from_records(&b.records);
        let (logits, trace) = forward(&params, &batch);
        let (ce, d_logits) = loss(&logits, &batch.labels);
        let grads = backward(&params, &trace, &d_logits, train.l2_weight);
        amsgrad_step(&mut params, &grads, &mut opt, lr_at(step, train));
        if !params.is_finite() {
            return Err(ExperimentError::Diverged { step });
        }
        last_loss = ce + train.l2_weight * params.weight_sq_sum();

        let done = step + 1;
        if done % eval.validation_interval == 0 || done == train.steps {
            let pred = predict(&params, &val_batch);
            let correct = pred.iter().zip(&val_batch.labels).filter(|(p, l)| p == l).count();
            history.push(ValidationPoint {
                step: done,
                accuracy: correct as f64 / val_batch.len() as f64,
                train_loss: last_loss,
            });
        }
    }

    let grid = evaluate_range(&params, dba, eval, balance)?;
    let summary = summarize_id_ood(&grid, train.train_max_len)?;
    let train_positive_fraction = pos_sum / train.steps as f64;
    let test_positive_fraction = grid.mean_positive_fraction();
    let target = balance.target_positive_fraction;
    let imbalanced = [train_positive_fraction, val.stats.achieved_positive_fraction, test_positive_fraction]
        .iter()
        .any(|f| (f - target).abs() > IMBALANCE_TOLERANCE);

    let sha = automaton_sha256(dba);
    let mut checkpoint = Checkpoint::new(train.clone(), train.steps, params.clone(), opt, seed);
    checkpoint.automaton_sha256 = Some(sha.clone());
    let record = RunRecord {
        automaton: info.name.clone(),
        n_states: dba.n_states(),
        automaton_sha256: sha,
        completion_added_state: info.completion_added_state,
        seed,
        config: RunConfigSnapshot {
            train: train.clone(),
            eval: eval.clone(),
            balance: *balance,
            train_mode,
        },
        model: ModelInfo::default(),
        history,
        id_accuracy: summary.id_accuracy,
        ood_accuracy: summary.ood_accuracy,
        category: summary.category,
        param_norm: param_l2_norm(&params),
        final_loss: last_loss,
        train_positive_fraction,
        validation_positive_fraction: val.stats.achieved_positive_fraction,
        test_positive_fraction,
        imbalanced,
        per_class_accuracy: imbalanced.then(|| grid.per_class_accuracy()),
        grid,
        version: None,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    Ok(TrainOutcome {
        record,
        checkpoint,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn small() -> (TrainConfig, EvalConfig) {
        (
            TrainConfig {
                hidden: 8,
                batch: 8,
                steps: 20,
                train_max_len: 8,
                seed: 3,
                ..TrainConfig::default()
            },
            EvalConfig {
                max_len: 12,
                per_length_count: 8,
                validation_count: 16,
                validation_len: 16,
                validation_interval: 5,
                ..EvalConfig::default()
            },
        )
    }

    #[test]
    fn runs_are_reproducible() {
        let d = fixtures::fig1();
        let info = AutomatonInfo {
            name: "fig1".into(),
            completion_added_state: false,
        };
        let (t, e) = small();
        let a = train_run(&d, &info, &t, SampleMode::Balanced, &Balance::default(), &e).unwrap();
        let b = train_run(&d, &info, &t, SampleMode::Balanced, &Balance::default(), &e).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(
            serde_json::to_string(&a.record).unwrap(),
            serde_json::to_string(&b.record).unwrap()
        );
        assert_eq!(a.record.history.len(), 4);
        assert_eq!(a.record.history.last().unwrap().step, 20);
        assert_eq!(a.record.grid.lengths.len(), 11);
        assert!(!serde_json::to_string(&a.record).unwrap().contains("wall_clock"));
    }

    #[test]
    fn universal_task_is_flagged_imbalanced() {
        let d = fixtures::universal();
        let info = AutomatonInfo {
            name: "universal".into(),
            completion_added_state: false,
        };
        let (mut t, e) = small();
        t.steps = 200;
        t.hidden = 16;
        let out = train_run(&d, &info, &t, SampleMode::Balanced, &Balance::default(), &e).unwrap();
        assert_eq!(out.record.history.last().unwrap().accuracy, 1.0);
        assert!(out.record.imbalanced);
        assert_eq!(out.record.per_class_accuracy, Some((Some(1.0), None)));
    }

    #[test]
    fn grid_must_straddle_training_lengths() {
        let d = fixtures::fig1();
        let info = AutomatonInfo {
            name: "fig1".into(),
            completion_added_state: false,
        };
        let (t, mut e) = small();
        e.max_len = 8;
        assert!(matches!(
            train_run(&d, &info, &t, SampleMode::Balanced, &Balance::default(), &e),
            Err(ExperimentError::Config(_))
        ));
    }
}
