//! Fourier-series models of grey forecast residuals and the EF-corrected forecast.
//!
//! A residual sequence `e(1..n)` is regressed on
//! `a0/2 + sum_i [a_i cos(2 pi i k / T) + b_i sin(2 pi i k / T)]` with `k` the
//! position inside the sequence. By default `T = n - 1` and
//! `F = max(0, floor((n-1)/2) - 1)` harmonics; with `F = 0` the model is the
//! plain residual mean. The correction for the next step is the fitted series
//! extrapolated to `k = n + 1`.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{GreyError, Result};
use crate::lsq::{solve_least_squares, LeastSquaresProblem};

/// Observed-minus-predicted errors of a grey model.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    values: Vec<f64>,
    start_index: usize,
}

impl ResidualSeries {
    /// `start_index` is the original-series index of the first residual
    /// (2 for in-window residuals).
    pub fn new(values: Vec<f64>, start_index: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(GreyError::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GreyError::NonFinite { index });
        }
        Ok(Self { values, start_index })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Harmonic regression of a residual sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierResidualModel {
    a0: f64,
    harmonics: Vec<(f64, f64)>,
    period: f64,
    fitted_len: usize,
}

/// Largest default harmonic count for `len` residuals.
pub fn max_harmonics(len: usize) -> usize {
    (len.saturating_sub(1) / 2).saturating_sub(1)
}

/// Default base period for `len` residuals.
pub fn default_period(len: usize) -> f64 {
    if len >= 2 {
        (len - 1) as f64
    } else {
        1.0
    }
}

impl FourierResidualModel {
    /// The model that predicts no error.
    pub fn zero() -> Self {
        Self {
            a0: 0.0,
            harmonics: Vec::new(),
            period: 1.0,
            fitted_len: 0,
        }
    }

    /// Fit with the default period and harmonic count.
    pub fn fit(residuals: &ResidualSeries) -> Result<Self> {
        Self::fit_capped(residuals.values(), None)
    }

    /// Default period; harmonic count `min(limit, max_harmonics(len))`.
    pub fn fit_capped(residuals: &[f64], limit: Option<usize>) -> Result<Self> {
        let len = residuals.len();
        let cap = max_harmonics(len);
        let harmonics = limit.map_or(cap, |l| l.min(cap));
        Self::fit_with(residuals, harmonics, default_period(len))
    }

    /// Fit with an explicit harmonic count and base period.
    pub fn fit_with(residuals: &[f64], harmonics: usize, period: f64) -> Result<Self> {
        let len = residuals.len();
        if len == 0 {
            return Err(GreyError::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(index) = residuals.iter().position(|v| !v.is_finite()) {
            return Err(GreyError::NonFinite { index });
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(GreyError::invalid(format!(
                "Fourier period must be positive, got {period}"
            )));
        }
        if harmonics == 0 {
            let mean = residuals.iter().sum::<f64>() / len as f64;
            return Ok(Self {
                a0: 2.0 * mean,
                harmonics: Vec::new(),
                period,
                fitted_len: len,
            });
        }
        let cols = 1 + 2 * harmonics;
        let mut design = Vec::with_capacity(len * cols);
        for k in 1..=len {
            design.extend(basis(k as f64, harmonics, period));
        }
        let problem = LeastSquaresProblem::from_row_major(len, cols, design, residuals.to_vec())?;
        let p = solve_least_squares(&problem)?;
        Ok(Self {
            a0: 2.0 * p[0],
            harmonics: p[1..].chunks(2).map(|c| (c[0], c[1])).collect(),
            period,
            fitted_len: len,
        })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// `(a_i, b_i)` for i = 1..F.
    pub fn harmonics(&self) -> &[(f64, f64)] {
        &self.harmonics
    }

    pub fn harmonic_count(&self) -> usize {
        self.harmonics.len()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Number of residuals the model was fitted on; the next index is this plus one.
    pub fn fitted_len(&self) -> usize {
        self.fitted_len
    }

    /// Fitted error at position `k` (1-based, may lie past the fitted range).
    pub fn extrapolate_error(&self, k: usize) -> f64 {
        let kf = k as f64;
        let mut value = self.a0 / 2.0;
        for (i, &(a, b)) in self.harmonics.iter().enumerate() {
            let arg = TAU * (i + 1) as f64 * kf / self.period;
            value += a * arg.cos() + b * arg.sin();
        }
        value
    }

    /// Error predicted for the step after the fitted residuals.
    pub fn next_error(&self) -> f64 {
        self.extrapolate_error(self.fitted_len + 1)
    }

    /// Fitted values at k = 1..fitted_len.
    pub fn in_sample(&self) -> Vec<f64> {
        (1..=self.fitted_len).map(|k| self.extrapolate_error(k)).collect()
    }
}

fn basis(k: f64, harmonics: usize, period: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(1 + 2 * harmonics);
    row.push(1.0);
    for i in 1..=harmonics {
        let arg = TAU * i as f64 * k / period;
        row.push(arg.cos());
        row.push(arg.sin());
    }
    row
}

/// `raw + e_hat(k)`. A zero correction returns `raw` untouched.
pub fn corrected_forecast(raw: f64, model: &FourierResidualModel, k: usize) -> Result<f64> {
    if !raw.is_finite() {
        return Err(GreyError::NonFinite { index: 0 });
    }
    let err = model.extrapolate_error(k);
    if err == 0.0 {
        return Ok(raw);
    }
    let value = raw + err;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(GreyError::NumericalDegeneracy(format!(
            "corrected forecast {raw} + {err} is not finite"
        )))
    }
}

/// Fixed-capacity history of the most recent one-step residuals.
#[derive(Debug, Clone)]
pub struct ResidualBuffer {
    values: VecDeque<f64>,
    capacity: usize,
}

impl ResidualBuffer {
    pub const DEFAULT_CAPACITY: usize = 24;

    pub fn new(capacity: usize) -> Result<Self> {
        if capacity < 3 {
            return Err(GreyError::invalid(format!(
                "residual window must hold at least 3 values, got {capacity}"
            )));
        }
        Ok(Self {
            values: VecDeque::with_capacity(capacity),
            capacity,
        })
    }

    pub fn push(&mut self, residual: f64) {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(residual);
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Oldest first.
    pub fn to_vec(&self) -> Vec<f64> {
        self.values.iter().copied().collect()
    }
}

/// Which residuals an EF model corrects with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfResidualMode {
    /// The last `r` one-step residuals carried across rolling steps.
    Rolling(usize),
    /// Only the in-window fit residuals of the current step.
    InWindow,
}

impl Default for EfResidualMode {
    fn default() -> Self {
        EfResidualMode::Rolling(ResidualBuffer::DEFAULT_CAPACITY)
    }
}

impl fmt::Display for EfResidualMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EfResidualMode::Rolling(r) => write!(f, "{r}"),
            EfResidualMode::InWindow => f.write_str("in-window"),
        }
    }
}

impl FromStr for EfResidualMode {
    type Err = GreyError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("in-window") || s.eq_ignore_ascii_case("inwindow") {
            return Ok(EfResidualMode::InWindow);
        }
        let r: usize = s.parse().map_err(|_| {
            GreyError::invalid(format!(
                "residual window must be an integer or `in-window`, got `{s}`"
            ))
        })?;
        if r < 3 {
            return Err(GreyError::invalid(format!(
                "residual window must be at least 3, got {r}"
            )));
        }
        Ok(EfResidualMode::Rolling(r))
    }
}
