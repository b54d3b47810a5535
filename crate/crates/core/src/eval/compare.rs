use std::time::Duration;

use rayon::prelude::*;

use crate::eval::config::Config;
use crate::eval::data::{Dataset, Parameter};
use crate::eval::metrics::{improvement, mape, rmse};
use crate::rolling::{roll_forecast, ForecastTrace, ModelSpec};

/// Reference and candidate of the improvement row.
pub const IMPROVEMENT_REFERENCE: &str = "EFGVM";
pub const IMPROVEMENT_CANDIDATE: &str = "GM_C";

/// Outcome of one (series, model) run.
#[derive(Debug, Clone)]
pub struct Cell {
    pub series: String,
    pub model: String,
    pub outcome: std::result::Result<CellStats, String>,
}

#[derive(Debug, Clone)]
pub struct CellStats {
    pub rmse: f64,
    /// `None` when every observation was zero.
    pub mape: Option<f64>,
    pub excluded_pairs: usize,
    pub fallback_steps: usize,
    pub steps: usize,
    pub compute_time: Duration,
    pub trace: ForecastTrace,
}

/// Across-series averages for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub model: String,
    pub rmse: Option<f64>,
    pub mape: Option<f64>,
    /// Series that produced a trace.
    pub series_count: usize,
    pub excluded_pairs: usize,
    pub fallback_steps: usize,
    pub failed_series: usize,
    /// Mean wall-clock time per series.
    pub compute_time: Duration,
    pub mean_step_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementRow {
    pub reference: String,
    pub candidate: String,
    pub rmse: Option<f64>,
    pub mape: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub parameter: Parameter,
    pub source: String,
    pub series_count: usize,
    pub rows: Vec<ModelRow>,
    pub improvement: Option<ImprovementRow>,
    /// Every cell, series-major in dataset order.
    pub cells: Vec<Cell>,
}

impl EvalReport {
    pub fn row(&self, model: &str) -> Option<&ModelRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.cells.iter().filter_map(|c| match &c.outcome {
            Err(e) => Some((c.series.as_str(), c.model.as_str(), e.as_str())),
            Ok(_) => None,
        })
    }
}

fn run_cell(series: &crate::series::Series, model: &ModelSpec, config: &Config) -> Cell {
    let outcome = roll_forecast(series, &config.rolling(model.clone()))
        .map_err(|e| e.to_string())
        .and_then(|trace| {
            let (p, o) = (trace.predicted(), trace.observed());
            let r = rmse(&p, &o).map_err(|e| e.to_string())?;
            let m = mape(&p, &o).ok();
            Ok(CellStats {
                rmse: r,
                mape: m.map(|m| m.percent),
                excluded_pairs: m.map_or(p.len(), |m| m.excluded),
                fallback_steps: trace.fallback_count(),
                steps: trace.predictions.len(),
                compute_time: trace.total_time(),
                trace,
            })
        });
    Cell {
        series: series.label().to_string(),
        model: model.name().to_string(),
        outcome,
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Rolls every model over every series and averages the metrics per model.
/// Series run in parallel, each on a single worker; the reduction walks cells
/// in dataset order so the report does not depend on scheduling. Failing cells
/// are recorded rather than aborting the report.
pub fn compare(dataset: &Dataset, models: &[ModelSpec], config: &Config) -> EvalReport {
    let per_series: Vec<Vec<Cell>> = dataset
        .series()
        .par_iter()
        .map(|s| models.iter().map(|m| run_cell(s, m, config)).collect())
        .collect();

    let rows: Vec<ModelRow> = models
        .iter()
        .enumerate()
        .map(|(j, model)| {
            let stats: Vec<&CellStats> = per_series
                .iter()
                .filter_map(|cells| cells[j].outcome.as_ref().ok())
                .collect();
            let rmses: Vec<f64> = stats.iter().map(|s| s.rmse).collect();
            let mapes: Vec<f64> = stats.iter().filter_map(|s| s.mape).collect();
            let total: Duration = stats.iter().map(|s| s.compute_time).sum();
            let steps: usize = stats.iter().map(|s| s.steps).sum();
            ModelRow {
                model: model.name().to_string(),
                rmse: mean(&rmses),
                mape: mean(&mapes),
                series_count: stats.len(),
                excluded_pairs: stats.iter().map(|s| s.excluded_pairs).sum(),
                fallback_steps: stats.iter().map(|s| s.fallback_steps).sum(),
                failed_series: per_series.len() - stats.len(),
                compute_time: if stats.is_empty() { Duration::ZERO } else { total / stats.len() as u32 },
                mean_step_time: if steps == 0 { Duration::ZERO } else { total / steps as u32 },
            }
        })
        .collect();

    let improvement = improvement_row(&rows);
    EvalReport {
        parameter: dataset.parameter(),
        source: dataset.source().to_string(),
        series_count: dataset.series().len(),
        rows,
        improvement,
        cells: per_series.into_iter().flatten().collect(),
    }
}

fn improvement_row(rows: &[ModelRow]) -> Option<ImprovementRow> {
    let reference = rows.iter().find(|r| r.model == IMPROVEMENT_REFERENCE)?;
    let candidate = rows.iter().find(|r| r.model == IMPROVEMENT_CANDIDATE)?;
    let pct = |r: Option<f64>, c: Option<f64>| improvement(r?, c?).ok();
    Some(ImprovementRow {
        reference: reference.model.clone(),
        candidate: candidate.model.clone(),
        rmse: pct(reference.rmse, candidate.rmse),
        mape: pct(reference.mape, candidate.mape),
    })
}
