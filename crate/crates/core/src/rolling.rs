//! Online rolling-window forecasting and one-time hyperparameter calibration.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::benchmarks::BenchmarkSpec;
use crate::correction::{
    corrected_forecast, max_harmonics, EfResidualMode, FourierResidualModel, ResidualBuffer,
    ResidualSeries,
};
use crate::error::{GreyError, Result};
use crate::eval::metrics::rmse;
use crate::grey::{fit_values, ModelKind, MIN_WINDOW};
use crate::series::Series;

/// A forecaster the engine can roll over a series.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Grey { kind: ModelKind, corrected: bool },
    Benchmark(BenchmarkSpec),
}

impl ModelSpec {
    pub fn grey(kind: ModelKind) -> Self {
        ModelSpec::Grey {
            kind,
            corrected: false,
        }
    }

    pub fn corrected(kind: ModelKind) -> Self {
        ModelSpec::Grey {
            kind,
            corrected: true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Grey { kind, corrected: false } => kind.short_name(),
            ModelSpec::Grey { kind, corrected: true } => kind.corrected_name(),
            ModelSpec::Benchmark(b) => b.name(),
        }
    }

    /// The twelve grey variants, each base model followed by its EF version.
    pub fn all_grey() -> Vec<Self> {
        ModelKind::ALL
            .iter()
            .flat_map(|&k| [Self::grey(k), Self::corrected(k)])
            .collect()
    }

    /// Grey variants followed by the benchmark fixtures.
    pub fn all() -> Vec<Self> {
        let mut models = Self::all_grey();
        models.extend(BenchmarkSpec::all_fixtures().into_iter().map(ModelSpec::Benchmark));
        models
    }

    pub fn kind(&self) -> Option<ModelKind> {
        match self {
            ModelSpec::Grey { kind, .. } => Some(*kind),
            ModelSpec::Benchmark(_) => None,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelSpec {
    type Err = GreyError;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if let Some(b) = BenchmarkSpec::fixture(trimmed) {
            return Ok(ModelSpec::Benchmark(b));
        }
        let upper = trimmed.to_ascii_uppercase();
        if let Some(rest) = upper.strip_prefix("EF") {
            if let Ok(kind) = rest.parse::<ModelKind>() {
                return Ok(ModelSpec::corrected(kind));
            }
        }
        trimmed
            .parse::<ModelKind>()
            .map(ModelSpec::grey)
            .map_err(|_| GreyError::invalid(format!("unknown model `{s}`")))
    }
}

/// Settings for one rolling run.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingConfig {
    /// Window length `w`; GM_SC is widened to at least 5.
    pub window: usize,
    pub model: ModelSpec,
    /// Angular frequency for trigonometric models; `None` uses the model default.
    pub omega: Option<f64>,
    pub ef_mode: EfResidualMode,
    /// Harmonic count for EF models, capped by the residual count; `None` uses the cap.
    pub ef_harmonics: Option<usize>,
    pub clamp_non_negative: bool,
}

impl RollingConfig {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            window: MIN_WINDOW,
            model,
            omega: None,
            ef_mode: EfResidualMode::default(),
            ef_harmonics: None,
            clamp_non_negative: false,
        }
    }

    pub fn with_model(&self, model: ModelSpec) -> Self {
        Self {
            model,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < MIN_WINDOW {
            return Err(GreyError::invalid(format!(
                "window must be at least {MIN_WINDOW}, got {}",
                self.window
            )));
        }
        if let Some(w) = self.omega {
            if !(w.is_finite() && w > 0.0) {
                return Err(GreyError::invalid(format!("omega must be positive, got {w}")));
            }
        }
        if let EfResidualMode::Rolling(r) = self.ef_mode {
            if r < 3 {
                return Err(GreyError::invalid(format!(
                    "residual window must be at least 3, got {r}"
                )));
            }
        }
        Ok(())
    }

    /// Window actually used by the configured model.
    pub fn effective_window(&self) -> usize {
        match self.model {
            ModelSpec::Grey { kind, .. } => self.window.max(kind.min_window()),
            ModelSpec::Benchmark(_) => self.window,
        }
    }

    pub fn effective_omega(&self) -> Option<f64> {
        let kind = self.model.kind()?;
        if kind.is_trigonometric() {
            self.omega.or(kind.default_omega())
        } else {
            None
        }
    }
}

/// One emitted forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// 1-based index of the forecast target in the source series.
    pub index: usize,
    pub predicted: f64,
    pub observed: f64,
    /// True when the model failed and the last observation was used instead.
    pub fallback: bool,
    pub error: Option<String>,
}

impl Prediction {
    pub fn residual(&self) -> f64 {
        self.observed - self.predicted
    }
}

/// Everything a rolling run produced.
#[derive(Debug, Clone)]
pub struct ForecastTrace {
    pub model: String,
    pub window: usize,
    pub predictions: Vec<Prediction>,
    pub step_times: Vec<Duration>,
}

impl ForecastTrace {
    pub fn predicted(&self) -> Vec<f64> {
        self.predictions.iter().map(|p| p.predicted).collect()
    }

    pub fn observed(&self) -> Vec<f64> {
        self.predictions.iter().map(|p| p.observed).collect()
    }

    pub fn residuals(&self) -> ResidualSeries {
        let values = self.predictions.iter().map(Prediction::residual).collect();
        let start = self.predictions.first().map_or(self.window + 1, |p| p.index);
        ResidualSeries::new(values, start).expect("a trace has at least one finite prediction")
    }

    pub fn fallback_count(&self) -> usize {
        self.predictions.iter().filter(|p| p.fallback).count()
    }

    pub fn success_count(&self) -> usize {
        self.predictions.len() - self.fallback_count()
    }

    pub fn total_time(&self) -> Duration {
        self.step_times.iter().sum()
    }

    pub fn mean_step_time(&self) -> Duration {
        if self.step_times.is_empty() {
            Duration::ZERO
        } else {
            self.total_time() / self.step_times.len() as u32
        }
    }

    pub fn rmse(&self) -> f64 {
        rmse(&self.predicted(), &self.observed()).expect("trace predictions are paired")
    }

    /// Same predictions with bit-identical values, ignoring timing.
    pub fn same_predictions(&self, other: &ForecastTrace) -> bool {
        self.predictions.len() == other.predictions.len()
            && self
                .predictions
                .iter()
                .zip(&other.predictions)
                .all(|(a, b)| {
                    a.index == b.index
                        && a.predicted.to_bits() == b.predicted.to_bits()
                        && a.observed.to_bits() == b.observed.to_bits()
                        && a.fallback == b.fallback
                })
    }
}

/// Rolls `config.model` over the series: for each `t = w..n-1` the model sees
/// only `x(1..t)` and forecasts `x(t+1)`.
pub fn roll_forecast(series: &Series, config: &RollingConfig) -> Result<ForecastTrace> {
    roll_values(series.values(), config)
}

pub(crate) fn roll_values(x: &[f64], config: &RollingConfig) -> Result<ForecastTrace> {
    roll_with_buffer(x, config).map(|(trace, _)| trace)
}

fn roll_with_buffer(
    x: &[f64],
    config: &RollingConfig,
) -> Result<(ForecastTrace, Option<ResidualBuffer>)> {
    config.validate()?;
    let w = config.effective_window();
    if x.len() < w + 1 {
        return Err(GreyError::InsufficientData {
            needed: w + 1,
            got: x.len(),
        });
    }
    let omega = config.effective_omega();
    let mut buffer = match config.ef_mode {
        EfResidualMode::Rolling(r) => Some(ResidualBuffer::new(r)?),
        EfResidualMode::InWindow => None,
    };
    let steps = x.len() - w;
    let mut predictions = Vec::with_capacity(steps);
    let mut step_times = Vec::with_capacity(steps);

    for end in w..x.len() {
        let started = Instant::now();
        let observed = x[end];
        let outcome = match &config.model {
            ModelSpec::Grey { kind, corrected } => {
                let window = &x[end - w..end];
                grey_step(*kind, *corrected, window, omega, config, buffer.as_ref())
            }
            ModelSpec::Benchmark(b) => b.forecast(&x[..end]).map(|v| (v, v)),
        };
        let (mut predicted, fallback, error) = match outcome {
            Ok((raw, value)) => {
                if let (Some(buf), ModelSpec::Grey { corrected: true, .. }) =
                    (buffer.as_mut(), &config.model)
                {
                    buf.push(observed - raw);
                }
                (value, false, None)
            }
            Err(e) => (x[end - 1], true, Some(e.to_string())),
        };
        if config.clamp_non_negative && predicted < 0.0 {
            predicted = 0.0;
        }
        predictions.push(Prediction {
            index: end + 1,
            predicted,
            observed,
            fallback,
            error,
        });
        step_times.push(started.elapsed());
    }

    let trace = ForecastTrace {
        model: config.model.name().to_string(),
        window: w,
        predictions,
        step_times,
    };
    Ok((trace, buffer))
}

/// Forecasts for the `horizon` steps after the last observation. EF models
/// first roll over the whole series to collect their residual buffer;
/// benchmarks feed their own forecasts back as history.
pub fn forecast_next(series: &Series, config: &RollingConfig, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(GreyError::invalid("horizon must be at least 1"));
    }
    config.validate()?;
    let x = series.values();
    let mut out = match &config.model {
        ModelSpec::Benchmark(b) => {
            let mut history = x.to_vec();
            for _ in 0..horizon {
                let next = b.forecast(&history)?;
                history.push(next);
            }
            history.split_off(x.len())
        }
        ModelSpec::Grey { kind, corrected } => {
            let w = config.effective_window();
            if x.len() < w {
                return Err(GreyError::InsufficientData {
                    needed: w,
                    got: x.len(),
                });
            }
            let window = &x[x.len() - w..];
            let fit = fit_values(*kind, window, config.effective_omega())?;
            let raw = (1..=horizon)
                .map(|h| fit.forecast_ahead(h))
                .collect::<Result<Vec<f64>>>()?;
            let residuals = match (corrected, config.ef_mode) {
                (false, _) => Vec::new(),
                (true, EfResidualMode::InWindow) => fit.in_sample_residuals(window)?,
                (true, EfResidualMode::Rolling(_)) if x.len() > w => roll_with_buffer(x, config)?
                    .1
                    .map(|b| b.to_vec())
                    .unwrap_or_default(),
                (true, EfResidualMode::Rolling(_)) => Vec::new(),
            };
            if residuals.is_empty() {
                raw
            } else {
                let model = FourierResidualModel::fit_capped(&residuals, config.ef_harmonics)?;
                raw.iter()
                    .enumerate()
                    .map(|(j, &r)| corrected_forecast(r, &model, model.fitted_len() + 1 + j))
                    .collect::<Result<Vec<f64>>>()?
            }
        }
    };
    if config.clamp_non_negative {
        for v in &mut out {
            *v = v.max(0.0);
        }
    }
    Ok(out)
}

/// Returns `(raw, emitted)` forecasts for one window.
fn grey_step(
    kind: ModelKind,
    corrected: bool,
    window: &[f64],
    omega: Option<f64>,
    config: &RollingConfig,
    buffer: Option<&ResidualBuffer>,
) -> Result<(f64, f64)> {
    let fit = fit_values(kind, window, omega)?;
    let raw = fit.forecast_ahead(1)?;
    if !corrected {
        return Ok((raw, raw));
    }
    let residuals = match buffer {
        Some(buf) if buf.is_empty() => return Ok((raw, raw)),
        Some(buf) => buf.to_vec(),
        None => fit.in_sample_residuals(window)?,
    };
    let model = FourierResidualModel::fit_capped(&residuals, config.ef_harmonics)?;
    let value = corrected_forecast(raw, &model, model.fitted_len() + 1)?;
    Ok((raw, value))
}

/// Candidate angular frequencies `lo, lo + step, ...` up to `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaGrid {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self {
            lo: 0.05,
            hi: 100.0,
            step: 0.05,
        }
    }
}

impl OmegaGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && lo > 0.0) {
            return Err(GreyError::invalid(format!("grid start must be positive, got {lo}")));
        }
        if !(hi.is_finite() && hi >= lo) {
            return Err(GreyError::invalid(format!(
                "grid end {hi} must not be below start {lo}"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(GreyError::invalid(format!("grid step must be positive, got {step}")));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn single(omega: f64) -> Result<Self> {
        Self::new(omega, omega, 1.0)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Grid points, rounded to 1e-9 so decimal steps land on decimal values.
    pub fn candidates(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.lo + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

/// Rolling RMSE for every grid point; `None` where no step succeeded or the
/// RMSE is not finite.
pub fn omega_scores(
    series: &Series,
    kind: ModelKind,
    grid: &OmegaGrid,
    config: &RollingConfig,
) -> Result<Vec<(f64, Option<f64>)>> {
    if !kind.is_trigonometric() {
        return Err(GreyError::invalid(format!(
            "{kind} has no frequency to calibrate"
        )));
    }
    let corrected = matches!(config.model, ModelSpec::Grey { corrected: true, .. });
    let base = RollingConfig {
        model: ModelSpec::Grey { kind, corrected },
        ..config.clone()
    };
    base.validate()?;
    let x = series.values();
    Ok(grid
        .candidates()
        .into_par_iter()
        .map(|omega| {
            let cfg = RollingConfig {
                omega: Some(omega),
                ..base.clone()
            };
            (omega, score(x, &cfg))
        })
        .collect())
}

fn score(x: &[f64], config: &RollingConfig) -> Option<f64> {
    let trace = roll_values(x, config).ok()?;
    if trace.success_count() == 0 {
        return None;
    }
    Some(trace.rmse()).filter(|v| v.is_finite())
}

fn best<T: Copy>(scores: &[(T, Option<f64>)]) -> Option<T> {
    let mut chosen: Option<(T, f64)> = None;
    for &(candidate, s) in scores {
        if let Some(s) = s {
            if chosen.map_or(true, |(_, b)| s < b) {
                chosen = Some((candidate, s));
            }
        }
    }
    chosen.map(|(c, _)| c)
}

/// Grid search for the frequency minimising rolling one-step RMSE on one
/// calibration series. The EF flag of `config.model` is honoured; ties go to
/// the smallest frequency.
pub fn calibrate_omega(
    series: &Series,
    kind: ModelKind,
    grid: &OmegaGrid,
    config: &RollingConfig,
) -> Result<f64> {
    let scores = omega_scores(series, kind, grid, config)?;
    best(&scores).ok_or_else(|| {
        GreyError::CalibrationFailed(format!(
            "{kind}: no frequency in [{}, {}] produced a usable forecast",
            grid.lo, grid.hi
        ))
    })
}

/// Rolling RMSE of an EF model for each harmonic count `0..=max_harmonics(r)`.
pub fn harmonic_scores(series: &Series, config: &RollingConfig) -> Result<Vec<(usize, Option<f64>)>> {
    if !matches!(config.model, ModelSpec::Grey { corrected: true, .. }) {
        return Err(GreyError::invalid(
            "harmonic calibration needs an error-corrected grey model",
        ));
    }
    config.validate()?;
    let cap = match config.ef_mode {
        EfResidualMode::Rolling(r) => max_harmonics(r),
        EfResidualMode::InWindow => max_harmonics(config.effective_window() - 1),
    };
    let x = series.values();
    Ok((0..=cap)
        .into_par_iter()
        .map(|f| {
            let cfg = RollingConfig {
                ef_harmonics: Some(f),
                ..config.clone()
            };
            (f, score(x, &cfg))
        })
        .collect())
}

/// Harmonic count minimising rolling RMSE; ties go to fewer harmonics.
pub fn calibrate_harmonics(series: &Series, config: &RollingConfig) -> Result<usize> {
    let scores = harmonic_scores(series, config)?;
    best(&scores).ok_or_else(|| {
        GreyError::CalibrationFailed(format!(
            "{}: no harmonic count produced a usable forecast",
            config.model
        ))
    })
}
