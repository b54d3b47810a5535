//! Observation sequences and the accumulation transforms grey models are built on.

use std::time::Duration;

use crate::error::{GreyError, Result};

/// A time-ordered sequence of finite observations with a fixed sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    interval: Duration,
    label: String,
}

impl Series {
    pub const DEFAULT_INTERVAL: Duration = Duration::from_secs(60);

    pub fn new(values: Vec<f64>, interval: Duration, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(GreyError::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GreyError::NonFinite { index });
        }
        if interval.is_zero() {
            return Err(GreyError::invalid("sampling interval must be positive"));
        }
        Ok(Self {
            values,
            interval,
            label: label.into(),
        })
    }

    /// Unlabelled series on the default one-minute grid.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Self::DEFAULT_INTERVAL, "")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn interval(&self) -> Duration {
        self.interval
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// First `len` observations, keeping interval and label.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        let len = len.min(self.values.len());
        Self::new(self.values[..len].to_vec(), self.interval, self.label.clone())
    }
}

/// Running prefix sums of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatedSeries {
    values: Vec<f64>,
}

impl AccumulatedSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First-order differences with the leading element kept; inverts [`accumulate`].
    pub fn difference(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut prev = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            out.push(if i == 0 { v } else { v - prev });
            prev = v;
        }
        out
    }
}

/// Adjacent-pair means of an accumulated series, indexed 2..n.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSeries {
    values: Vec<f64>,
}

impl MeanSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Accumulated generating operation: `acc[k] = x[0] + ... + x[k]`, summed left to right.
pub fn accumulate(series: &Series) -> Result<AccumulatedSeries> {
    accumulate_values(series.values())
}

pub(crate) fn accumulate_values(values: &[f64]) -> Result<AccumulatedSeries> {
    if values.is_empty() {
        return Err(GreyError::InsufficientData { needed: 1, got: 0 });
    }
    let mut acc = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (index, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(GreyError::NonFinite { index });
        }
        sum += v;
        acc.push(sum);
    }
    Ok(AccumulatedSeries { values: acc })
}

/// `z(k) = (acc(k-1) + acc(k)) / 2` for k = 2..n.
pub fn mean_sequence(acc: &AccumulatedSeries) -> Result<MeanSeries> {
    if acc.len() < 2 {
        return Err(GreyError::InsufficientData {
            needed: 2,
            got: acc.len(),
        });
    }
    let values = acc
        .values
        .windows(2)
        .map(|pair| (pair[0] + pair[1]) / 2.0)
        .collect();
    Ok(MeanSeries { values })
}

/// Recovers an original-scale value from two consecutive accumulated values.
pub fn restore(acc_forecast: f64, acc_prev: f64) -> Result<f64> {
    if !acc_forecast.is_finite() {
        return Err(GreyError::NonFinite { index: 0 });
    }
    if !acc_prev.is_finite() {
        return Err(GreyError::NonFinite { index: 1 });
    }
    Ok(acc_forecast - acc_prev)
}
