use serde::Deserialize;

use crate::error::{GreyError, Result};

/// How the AR(inf) forecast weights are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiRoute {
    /// Fixed closed-form recursions for the ARIMA(1,1,2) and
    /// SARIMA(1,0,3)(1,0,0) shapes; other orders use `Standard`.
    #[default]
    Closed,
    /// Power-series division of `Phi(B^s) phi(B) (1-B)^d (1-B^s)^D / theta(B)`.
    Standard,
}

/// Orders and coefficients of a seasonal ARIMA forecaster.
///
/// Polynomials follow the Box-Jenkins sign convention:
/// `phi(B) = 1 - phi_1 B - ...`, `theta(B) = 1 - theta_1 B - ...`,
/// `Phi(B^s) = 1 - Phi_1 B^s - ...`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArimaParams {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub d: usize,
    pub seasonal_d: usize,
    pub season_period: usize,
    pub mu: f64,
    pub truncation: usize,
    pub psi_route: PsiRoute,
}

impl Default for ArimaParams {
    fn default() -> Self {
        Self {
            phi: Vec::new(),
            theta: Vec::new(),
            seasonal_phi: Vec::new(),
            d: 0,
            seasonal_d: 0,
            season_period: 18,
            mu: 0.0,
            truncation: 50,
            psi_route: PsiRoute::Closed,
        }
    }
}

/// A validated, invertible ARIMA specification.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaSpec {
    params: ArimaParams,
}

pub const MIN_TRUNCATION: usize = 20;

impl ArimaSpec {
    pub fn new(params: ArimaParams) -> Result<Self> {
        if params.truncation < MIN_TRUNCATION {
            return Err(GreyError::invalid(format!(
                "AR(inf) truncation must be at least {MIN_TRUNCATION}, got {}",
                params.truncation
            )));
        }
        if params.season_period == 0 {
            return Err(GreyError::invalid("season period must be at least 1"));
        }
        let all = params
            .phi
            .iter()
            .chain(&params.theta)
            .chain(&params.seasonal_phi)
            .chain(std::iter::once(&params.mu));
        if all.clone().any(|v| !v.is_finite()) {
            return Err(GreyError::invalid("ARIMA coefficients must be finite"));
        }
        if let Some(k) = step_down(&params.theta) {
            return Err(GreyError::invalid(format!(
                "MA polynomial is not invertible (reflection coefficient {k})"
            )));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &ArimaParams {
        &self.params
    }

    pub fn with_route(mut self, route: PsiRoute) -> Self {
        self.params.psi_route = route;
        self
    }

    pub fn with_truncation(self, truncation: usize) -> Result<Self> {
        Self::new(ArimaParams {
            truncation,
            ..self.params
        })
    }

    /// Observations needed for one forecast.
    pub fn min_history(&self) -> usize {
        let p = &self.params;
        p.truncation + p.d + p.season_period * p.seasonal_d
    }

    /// `psi_0 .. psi_{count-1}`; zero past the last non-zero weight of the truncated expansion.
    pub fn psi_weights(&self, count: usize) -> Vec<f64> {
        let mut w = self.weights();
        w.resize(count.max(w.len()), 0.0);
        w.truncate(count);
        w
    }

    /// Weights used by the forecast: `psi_0 = 1` followed by the AR(inf) terms.
    fn weights(&self) -> Vec<f64> {
        let p = &self.params;
        match p.psi_route {
            PsiRoute::Closed => match closed_shape(p) {
                Some(Shape::Arima) => closed_arima(p),
                Some(Shape::Sarima) => closed_sarima(p),
                None => standard(p),
            },
            PsiRoute::Standard => standard(p),
        }
    }

    /// One-step forecast `mu (1 - sum psi_i) + sum psi_i Z_{t+1-i}` over the
    /// truncated weights; `history` ends at `Z_t`.
    pub fn forecast(&self, history: &[f64]) -> Result<f64> {
        let needed = self.min_history();
        if history.len() < needed {
            return Err(GreyError::InsufficientData {
                needed,
                got: history.len(),
            });
        }
        let w = self.weights();
        let t = history.len() - 1;
        let mut sum_psi = 0.0;
        let mut dot = 0.0;
        for (i, &psi) in w.iter().enumerate().skip(1) {
            sum_psi += psi;
            dot += psi * history[t + 1 - i];
        }
        let value = self.params.mu * (1.0 - sum_psi) + dot;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(GreyError::NumericalDegeneracy(format!(
                "ARIMA forecast evaluated to {value}"
            )))
        }
    }

    /// Iterated forecast `horizon` steps ahead, feeding forecasts back as history.
    pub fn forecast_ahead(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        let mut extended = history.to_vec();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let next = self.forecast(&extended)?;
            extended.push(next);
            out.push(next);
        }
        Ok(out)
    }
}

enum Shape {
    Arima,
    Sarima,
}

fn closed_shape(p: &ArimaParams) -> Option<Shape> {
    if p.d == 1 && p.seasonal_d == 0 && p.seasonal_phi.is_empty() && p.phi.len() <= 1 && p.theta.len() <= 2 {
        Some(Shape::Arima)
    } else if p.d == 0
        && p.seasonal_d == 0
        && p.phi.len() <= 1
        && p.theta.len() <= 3
        && p.seasonal_phi.len() <= 1
    {
        Some(Shape::Sarima)
    } else {
        None
    }
}

fn coeff(v: &[f64], i: usize) -> f64 {
    v.get(i).copied().unwrap_or(0.0)
}

/// psi_1 = 1 + phi - theta_1, psi_2 = psi_1 theta_1 - phi - theta_2,
/// psi_i = psi_{i-1} theta_1 + theta_2 for i > 2.
fn closed_arima(p: &ArimaParams) -> Vec<f64> {
    let (phi, t1, t2) = (coeff(&p.phi, 0), coeff(&p.theta, 0), coeff(&p.theta, 1));
    let l = p.truncation;
    let mut psi = vec![0.0; l + 1];
    psi[0] = 1.0;
    psi[1] = 1.0 + phi - t1;
    if l >= 2 {
        psi[2] = psi[1] * t1 - phi - t2;
    }
    for i in 3..=l {
        psi[i] = psi[i - 1] * t1 + t2;
    }
    psi
}

/// psi_1 = phi - theta_1, psi_2 = psi_1 theta_1 - theta_2,
/// psi_3 = psi_2 theta_1 + psi_2 theta_2 - theta_3, then the three-term
/// recursion, plus `Phi` at lag s and `-phi Phi` at lag s + 1.
fn closed_sarima(p: &ArimaParams) -> Vec<f64> {
    let phi = coeff(&p.phi, 0);
    let (t1, t2, t3) = (coeff(&p.theta, 0), coeff(&p.theta, 1), coeff(&p.theta, 2));
    let cap = coeff(&p.seasonal_phi, 0);
    let s = p.season_period;
    let l = p.truncation;
    let mut psi = vec![0.0; l + 1];
    psi[0] = 1.0;
    for i in 1..=l {
        let mut v = match i {
            1 => phi - t1,
            2 => psi[1] * t1 - t2,
            3 => psi[2] * t1 + psi[2] * t2 - t3,
            _ => psi[i - 1] * t1 + psi[i - 2] * t2 + psi[i - 3] * t3,
        };
        if i == s {
            v += cap;
        }
        if i == s + 1 {
            v -= phi * cap;
        }
        psi[i] = v;
    }
    psi
}

/// `pi(B) = Delta(B) * trunc_L[phi(B) Phi(B^s) / theta(B)]`, returned as
/// `psi_0 = 1, psi_i = -pi_i`. The differencing operator is applied exactly,
/// so `L + d + sD` history values enter the forecast.
fn standard(p: &ArimaParams) -> Vec<f64> {
    let l = p.truncation;
    let s = p.season_period;
    let ar = poly_mul(&lag_poly(&p.phi, 1), &lag_poly(&p.seasonal_phi, s));
    let ma = lag_poly(&p.theta, 1);
    // power-series division ar / ma to degree l
    let mut c = vec![0.0; l + 1];
    for j in 0..=l {
        let mut v = coeff(&ar, j);
        for i in 1..ma.len().min(j + 1) {
            v -= ma[i] * c[j - i];
        }
        c[j] = v;
    }
    let mut pi = c;
    for _ in 0..p.d {
        pi = poly_mul(&pi, &[1.0, -1.0]);
    }
    for _ in 0..p.seasonal_d {
        let mut seasonal = vec![0.0; s + 1];
        seasonal[0] = 1.0;
        seasonal[s] = -1.0;
        pi = poly_mul(&pi, &seasonal);
    }
    let mut psi: Vec<f64> = pi.iter().map(|v| -v).collect();
    psi[0] = 1.0;
    psi
}

/// `1 - c_1 B^step - c_2 B^{2 step} - ...`
fn lag_poly(coeffs: &[f64], step: usize) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len() * step + 1];
    out[0] = 1.0;
    for (i, &c) in coeffs.iter().enumerate() {
        out[(i + 1) * step] = -c;
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Schur-Cohn step-down on `1 - c_1 B - ... - c_q B^q`. Returns the first
/// reflection coefficient with magnitude >= 1, or `None` when every root lies
/// outside the unit circle.
fn step_down(coeffs: &[f64]) -> Option<f64> {
    let mut a = coeffs.to_vec();
    while let Some(&last) = a.last() {
        if last == 0.0 {
            a.pop();
        } else {
            break;
        }
    }
    for m in (1..=a.len()).rev() {
        let k = a[m - 1];
        if !(k.abs() < 1.0) {
            return Some(k);
        }
        let denom = 1.0 - k * k;
        let prev = a.clone();
        for i in 1..m {
            a[i - 1] = (prev[i - 1] + k * prev[m - i - 1]) / denom;
        }
        a.truncate(m - 1);
    }
    None
}
