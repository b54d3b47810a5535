use serde::Deserialize;

use crate::error::{GreyError, Result};

/// Affine autoregression `Z_{t+1} = c + sum_j coeffs[j] Z_{t - j*delay}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub intercept: f64,
    pub coeffs: Vec<f64>,
    #[serde(default = "one")]
    pub delay: usize,
}

fn one() -> usize {
    1
}

impl LinearSpec {
    pub fn new(intercept: f64, coeffs: Vec<f64>, delay: usize) -> Result<Self> {
        let spec = Self {
            intercept,
            coeffs,
            delay,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() {
            return Err(GreyError::invalid("linear model needs at least one coefficient"));
        }
        if self.delay == 0 {
            return Err(GreyError::invalid("linear model lag spacing must be at least 1"));
        }
        if !self.intercept.is_finite() || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(GreyError::invalid("linear model coefficients must be finite"));
        }
        Ok(())
    }

    pub fn min_history(&self) -> usize {
        (self.coeffs.len() - 1) * self.delay + 1
    }

    pub fn forecast(&self, history: &[f64]) -> Result<f64> {
        let needed = self.min_history();
        if history.len() < needed {
            return Err(GreyError::InsufficientData {
                needed,
                got: history.len(),
            });
        }
        let t = history.len() - 1;
        Ok(affine(self.intercept, &self.coeffs, |j| history[t - j * self.delay]))
    }
}

/// Two-regime self-exciting threshold autoregression. The regime is chosen by
/// `X_t = Z_{t-delay}`: low when `X_t <= threshold`, high otherwise. Each
/// regime is `c + sum_j coeffs[j] Z_{t-j}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetarSpec {
    pub low_intercept: f64,
    pub low_coeffs: Vec<f64>,
    pub high_intercept: f64,
    pub high_coeffs: Vec<f64>,
    pub threshold: f64,
    #[serde(default)]
    pub delay: usize,
}

impl SetarSpec {
    pub fn validate(&self) -> Result<()> {
        if self.low_coeffs.is_empty() || self.high_coeffs.is_empty() {
            return Err(GreyError::invalid("both SETAR regimes need coefficients"));
        }
        let finite = [self.low_intercept, self.high_intercept, self.threshold]
            .iter()
            .chain(&self.low_coeffs)
            .chain(&self.high_coeffs)
            .all(|v| v.is_finite());
        if !finite {
            return Err(GreyError::invalid("SETAR coefficients and threshold must be finite"));
        }
        Ok(())
    }

    pub fn min_history(&self) -> usize {
        self.low_coeffs
            .len()
            .max(self.high_coeffs.len())
            .max(self.delay + 1)
    }

    pub fn forecast(&self, history: &[f64]) -> Result<f64> {
        let needed = self.min_history();
        if history.len() < needed {
            return Err(GreyError::InsufficientData {
                needed,
                got: history.len(),
            });
        }
        let t = history.len() - 1;
        let (c, coeffs) = if history[t - self.delay] <= self.threshold {
            (self.low_intercept, &self.low_coeffs)
        } else {
            (self.high_intercept, &self.high_coeffs)
        };
        Ok(affine(c, coeffs, |j| history[t - j]))
    }
}

fn affine(intercept: f64, coeffs: &[f64], lag: impl Fn(usize) -> f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .fold(intercept, |acc, (j, c)| acc + c * lag(j))
}
