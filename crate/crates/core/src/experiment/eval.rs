use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::automaton::Dba;
use crate::neural::{predict, Batch, RnnParams};
use crate::rng::{derive_seed, domain};
use crate::sampling::{SampleMode, Sampler};

/// Test-grid and validation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub per_length_count: usize,
    pub mode: SampleMode,
    pub seed: u64,
    pub validation_count: usize,
    pub validation_len: usize,
    pub validation_interval: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            min_len: 2,
            max_len: 512,
            per_length_count: 512,
            mode: SampleMode::Balanced,
            seed: 0,
            validation_count: 1024,
            validation_len: 512,
            validation_interval: 250,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_len < 2 || self.min_len > self.max_len {
            return Err(format!("need 2 <= min_len <= max_len, got {}..={}", self.min_len, self.max_len));
        }
        if self.per_length_count == 0 || self.validation_count == 0 || self.validation_interval == 0 {
            return Err("per_length_count, validation_count and validation_interval must be positive".into());
        }
        if self.validation_len < 2 {
            return Err("validation_len must be at least 2".into());
        }
        Ok(())
    }
}

/// Class-balance settings shared by training, validation and test sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub target_positive_fraction: f64,
    pub oversample_factor: usize,
    pub max_resample_attempts: usize,
}

impl Default for Balance {
    fn default() -> Self {
        Self {
            target_positive_fraction: 0.5,
            oversample_factor: 4,
            max_resample_attempts: 100,
        }
    }
}

pub(crate) fn draw(sampler: &Sampler<'_>, mode: SampleMode, balance: &Balance, count: usize, lo: usize, hi: usize, seed: u64) -> crate::sampling::Batch {
    match mode {
        SampleMode::Balanced => sampler.balanced_batch(count, lo..=hi, balance.target_positive_fraction, balance.oversample_factor, seed),
        SampleMode::Uniform => sampler.uniform_batch(count, lo..=hi, seed),
    }
}

/// Accuracy per test length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub lengths: Vec<usize>,
    pub per_length_count: usize,
    pub accuracy: Vec<f64>,
    pub positive_fraction: Vec<f64>,
    pub correct_positive: Vec<usize>,
    pub correct_negative: Vec<usize>,
    pub positives: Vec<usize>,
}

impl EvalGrid {
    /// `(accuracy on accepted words, accuracy on rejected words)` over the grid.
    pub fn per_class_accuracy(&self) -> (Option<f64>, Option<f64>) {
        let pos: usize = self.positives.iter().sum();
        let neg: usize = self.lengths.len() * self.per_length_count - pos;
        let cp: usize = self.correct_positive.iter().sum();
        let cn: usize = self.correct_negative.iter().sum();
        (
            (pos > 0).then(|| cp as f64 / pos as f64),
            (neg > 0).then(|| cn as f64 / neg as f64),
        )
    }

    pub fn mean_positive_fraction(&self) -> f64 {
        self.positive_fraction.iter().sum::<f64>() / self.positive_fraction.len().max(1) as f64
    }

    /// CSV with columns `length,n_samples,accuracy,positive_fraction`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("length,n_samples,accuracy,positive_fraction\n");
        for i in 0..self.lengths.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.lengths[i], self.per_length_count, self.accuracy[i], self.positive_fraction[i]
            )
            .unwrap();
        }
        out
    }
}

/// Fraction of `batch` that `params` classifies correctly.
pub fn accuracy(params: &RnnParams, records: &[crate::SequenceRecord]) -> f64 {
    let batch = Batch::from_records(records);
    let pred = predict(params, &batch);
    let correct = pred.iter().zip(&batch.labels).filter(|(p, l)| p == l).count();
    correct as f64 / records.len().max(1) as f64
}

/// Scores `params` on freshly sampled sequences of every length in the grid.
/// Length `L` draws from its own stream of `cfg.seed`.
pub fn evaluate_range(params: &RnnParams, dba: &Dba, cfg: &EvalConfig, balance: &Balance) -> Result<EvalGrid, ExperimentError> {
    cfg.validate().map_err(ExperimentError::Config)?;
    let sampler = Sampler::new(dba, balance.max_resample_attempts)?;
    let lengths: Vec<usize> = (cfg.min_len..=cfg.max_len).collect();
    let rows: Vec<(f64, f64, usize, usize, usize)> = lengths
        .par_iter()
        .map(|&len| {
            let seed = derive_seed(cfg.seed, domain::EVAL, len as u64);
            let b = draw(&sampler, cfg.mode, balance, cfg.per_length_count, len, len, seed);
            let batch = Batch::from_records(&b.records);
            let pred = predict(params, &batch);
            let (mut cp, mut cn) = (0, 0);
            for (p, l) in pred.iter().zip(&batch.labels) {
                match (p == l, *l) {
                    (true, 1) => cp += 1,
                    (true, _) => cn += 1,
                    _ => {}
                }
            }
            let n = b.records.len() as f64;
            ((cp + cn) as f64 / n, b.stats.achieved_positive_fraction, cp, cn, b.stats.positives)
        })
        .collect();
    Ok(EvalGrid {
        lengths,
        per_length_count: cfg.per_length_count,
        accuracy: rows.iter().map(|r| r.0).collect(),
        positive_fraction: rows.iter().map(|r| r.1).collect(),
        correct_positive: rows.iter().map(|r| r.2).collect(),
        correct_negative: rows.iter().map(|r| r.3).collect(),
        positives: rows.iter().map(|r| r.4).collect(),
    })
}

/// Generalization bins by out-of-distribution accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    /// above 99.9%
    Perfect,
    /// 98% to 99.9%
    NearPerfect,
    /// 95% to 98%
    Good,
    /// 90% to 95%
    Moderate,
    /// below 90%
    Poor,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Perfect,
        Category::NearPerfect,
        Category::Good,
        Category::Moderate,
        Category::Poor,
    ];

    /// Lower bounds are inclusive except for `Perfect`, which needs strictly
    /// more than 0.999.
    pub fn from_accuracy(acc: f64) -> Self {
        if acc > 0.999 {
            Category::Perfect
        } else if acc >= 0.98 {
            Category::NearPerfect
        } else if acc >= 0.95 {
            Category::Good
        } else if acc >= 0.90 {
            Category::Moderate
        } else {
            Category::Poor
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Perfect => "Perfect (>99.9%)",
            Category::NearPerfect => "Near-Perfect (98-99.9%)",
            Category::Good => "Good (95-98%)",
            Category::Moderate => "Moderate (90-95%)",
            Category::Poor => "Poor (<90.0%)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdOodSummary {
    pub id_accuracy: f64,
    pub ood_accuracy: f64,
    pub category: Category,
}

/// Mean accuracy over lengths `<= train_max_len` (ID) and above it (OOD);
/// the category is taken from OOD.
pub fn summarize_id_ood(grid: &EvalGrid, train_max_len: usize) -> Result<IdOodSummary, ExperimentError> {
    let (mut id, mut ood) = (Vec::new(), Vec::new());
    for (&len, &acc) in grid.lengths.iter().zip(&grid.accuracy) {
        if len <= train_max_len {
            id.push(acc);
        } else {
            ood.push(acc);
        }
    }
    if id.is_empty() || ood.is_empty() {
        return Err(ExperimentError::Config(format!(
            "evaluation grid must cover lengths on both sides of {train_max_len}"
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ood_accuracy = mean(&ood);
    Ok(IdOodSummary {
        id_accuracy: mean(&id),
        ood_accuracy,
        category: Category::from_accuracy(ood_accuracy),
    })
}
