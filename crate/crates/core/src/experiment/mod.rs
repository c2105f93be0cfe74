//! Training runs, length-grid evaluation, and cross-run analysis.

mod eval;
pub mod plot;
mod stats;
mod train;

pub use eval::{accuracy, evaluate_range, summarize_id_ood, Balance, Category, EvalConfig, EvalGrid, IdOodSummary};
pub use stats::{ln_gamma, pearson, regularized_incomplete_beta, CorrelationResult, StatsError};
pub use train::{
    train_run, AutomatonInfo, ModelInfo, RunConfigSnapshot, RunRecord, TrainOutcome, ValidationPoint,
    IMBALANCE_TOLERANCE,
};

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::SampleError;
use plot::{chart, Series, Style};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sampling failed: {0}")]
    Sampling(#[from] SampleError),
    #[error("parameters became non-finite at step {step}")]
    Diverged { step: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// One row of the cross-run table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub automaton: String,
    pub seed: u64,
    pub n_states: usize,
    pub id_accuracy: f64,
    pub ood_accuracy: f64,
    pub param_norm: f64,
}

/// State count against OOD accuracy and against parameter norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub states_vs_ood: CorrelationResult,
    pub states_vs_norm: CorrelationResult,
    pub rows: Vec<RunRow>,
}

impl CorrelationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("automaton,seed,n_states,id_accuracy,ood_accuracy,param_norm\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.automaton, r.seed, r.n_states, r.id_accuracy, r.ood_accuracy, r.param_norm
            )
            .unwrap();
        }
        out
    }

    pub fn ood_scatter_svg(&self) -> String {
        let pts = self.rows.iter().map(|r| (r.n_states as f64, r.ood_accuracy)).collect();
        chart(
            &format!("OOD accuracy vs states (r = {:.3}, p = {:.3})", self.states_vs_ood.r, self.states_vs_ood.p),
            "number of states",
            "OOD accuracy",
            &[Series { name: "runs".into(), points: pts }],
            Style::Scatter,
            Some((0.0, 1.0)),
        )
    }

    pub fn norm_scatter_svg(&self) -> String {
        let pts = self.rows.iter().map(|r| (r.n_states as f64, r.param_norm)).collect();
        chart(
            &format!("parameter norm vs states (r = {:.3}, p = {:.3})", self.states_vs_norm.r, self.states_vs_norm.p),
            "number of states",
            "parameter L2 norm",
            &[Series { name: "runs".into(), points: pts }],
            Style::Scatter,
            None,
        )
    }
}

/// Correlates state count with OOD accuracy and with parameter norm.
pub fn correlate_runs(records: &[RunRecord]) -> Result<CorrelationReport, ExperimentError> {
    let rows: Vec<RunRow> = records
        .iter()
        .map(|r| RunRow {
            automaton: r.automaton.clone(),
            seed: r.seed,
            n_states: r.n_states,
            id_accuracy: r.id_accuracy,
            ood_accuracy: r.ood_accuracy,
            param_norm: r.param_norm,
        })
        .collect();
    let states: Vec<f64> = rows.iter().map(|r| r.n_states as f64).collect();
    let ood: Vec<f64> = rows.iter().map(|r| r.ood_accuracy).collect();
    let norm: Vec<f64> = rows.iter().map(|r| r.param_norm).collect();
    Ok(CorrelationReport {
        states_vs_ood: pearson(&states, &ood)?,
        states_vs_norm: pearson(&states, &norm)?,
        rows,
    })
}

/// One line of the generalization summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: Option<Category>,
    pub tasks: usize,
    pub proportion: f64,
    pub mean_id: Option<f64>,
    pub mean_ood: Option<f64>,
}

/// Tasks per generalization category plus an overall row (`category: None`).
pub fn category_table(records: &[RunRecord]) -> Vec<CategoryRow> {
    let total = records.len();
    let row = |category: Option<Category>, sel: Vec<&RunRecord>| {
        let n = sel.len();
        let mean = |f: fn(&RunRecord) -> f64| (n > 0).then(|| sel.iter().map(|r| f(r)).sum::<f64>() / n as f64);
        CategoryRow {
            category,
            tasks: n,
            proportion: if total == 0 { 0.0 } else { n as f64 / total as f64 },
            mean_id: mean(|r| r.id_accuracy),
            mean_ood: mean(|r| r.ood_accuracy),
        }
    };
    let mut rows: Vec<CategoryRow> = Category::ALL
        .iter()
        .map(|&c| row(Some(c), records.iter().filter(|r| r.category == c).collect()))
        .collect();
    rows.push(row(None, records.iter().collect()));
    rows
}

/// Markdown rendering of [`category_table`].
pub fn category_table_markdown(rows: &[CategoryRow]) -> String {
    let pct = |v: Option<f64>| v.map_or("--".to_string(), |x| format!("{:.1}%", 100.0 * x));
    let mut out = String::from("| Performance Category | Tasks | Proportion | Mean ID Acc. | Mean OOD Acc. |\n|---|---:|---:|---:|---:|\n");
    for r in rows {
        let name = r.category.map_or("Overall", Category::label);
        writeln!(
            out,
            "| {} | {} | {:.1}% | {} | {} |",
            name,
            r.tasks,
            100.0 * r.proportion,
            pct(r.mean_id),
            pct(r.mean_ood)
        )
        .unwrap();
    }
    out
}

/// Validation accuracy over training steps, one series per run.
pub fn validation_curve_svg(records: &[&RunRecord]) -> String {
    let series: Vec<Series> = records
        .iter()
        .map(|r| Series {
            name: format!("{} (seed {})", r.automaton, r.seed),
            points: r.history.iter().map(|h| (h.step as f64, h.accuracy)).collect(),
        })
        .collect();
    chart("validation accuracy", "training step", "accuracy", &series, Style::Line, Some((0.0, 1.0)))
}

/// Accuracy against test length, one series per run.
pub fn range_curve_svg(records: &[&RunRecord]) -> String {
    let series: Vec<Series> = records
        .iter()
        .map(|r| Series {
            name: format!("{} (seed {})", r.automaton, r.seed),
            points: r.grid.lengths.iter().zip(&r.grid.accuracy).map(|(&l, &a)| (l as f64, a)).collect(),
        })
        .collect();
    chart("range evaluation", "sequence length", "accuracy", &series, Style::Line, Some((0.0, 1.0)))
}
