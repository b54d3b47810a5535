//! The six grey forecasters and their time-response functions.
//!
//! Every model is fitted on a window `x(1..w)` and describes the accumulated
//! series through the solution of its whitenization ODE,
//! `dx1/dt + a*x1 = f(t)`, with the initial condition `x1(1) = x(1)`.
//! Forecasts in original units are first differences of that solution.
//!
//! Trigonometric forcing is evaluated on the within-window clock, so the
//! design row for index `k` uses `sin(omega*k)` and the fitted ODE uses the
//! same `t`. Forecasts always difference the ODE solution directly rather
//! than using hand-expanded difference formulas.

mod fit;

use std::fmt;
use std::str::FromStr;

use crate::error::{GreyError, Result};

pub use fit::{fit_esc, fit_gm11, fit_gvm, fit_trig, fit_values};

/// Below this magnitude the development coefficient is treated as zero.
pub const DEGENERATE_A: f64 = 1e-12;

/// Minimum rolling window for any grey model.
pub const MIN_WINDOW: usize = 4;

const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Grey model family, named as in the comparison tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Gm11,
    Gvm,
    GmS,
    GmC,
    GmSc,
    GmEsc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Gm11,
        ModelKind::Gvm,
        ModelKind::GmS,
        ModelKind::GmC,
        ModelKind::GmSc,
        ModelKind::GmEsc,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::Gm11 => "GM(1,1)",
            ModelKind::Gvm => "GVM",
            ModelKind::GmS => "GM_S",
            ModelKind::GmC => "GM_C",
            ModelKind::GmSc => "GM_SC",
            ModelKind::GmEsc => "GM_ESC",
        }
    }

    /// Name of the Fourier error-corrected variant.
    pub fn corrected_name(self) -> &'static str {
        match self {
            ModelKind::Gm11 => "EFGM",
            ModelKind::Gvm => "EFGVM",
            ModelKind::GmS => "EFGM_S",
            ModelKind::GmC => "EFGM_C",
            ModelKind::GmSc => "EFGM_SC",
            ModelKind::GmEsc => "EFGM_ESC",
        }
    }

    pub fn is_trigonometric(self) -> bool {
        matches!(
            self,
            ModelKind::GmS | ModelKind::GmC | ModelKind::GmSc | ModelKind::GmEsc
        )
    }

    /// Angular frequency used when no calibration has been run.
    pub fn default_omega(self) -> Option<f64> {
        match self {
            ModelKind::GmS => Some(4.30),
            ModelKind::GmC => Some(2.65),
            ModelKind::GmSc => Some(9.30),
            ModelKind::GmEsc => Some(74.10),
            ModelKind::Gm11 | ModelKind::Gvm => None,
        }
    }

    /// Parameters estimated by the (first-stage) least-squares fit.
    pub fn parameter_count(self) -> usize {
        match self {
            ModelKind::Gm11 | ModelKind::Gvm | ModelKind::GmEsc => 2,
            ModelKind::GmS | ModelKind::GmC => 3,
            ModelKind::GmSc => 4,
        }
    }

    /// Smallest window giving at least as many equations as parameters.
    pub fn min_window(self) -> usize {
        (self.parameter_count() + 1).max(MIN_WINDOW)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelKind {
    type Err = GreyError;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ',' | '_' | '-' | ' '))
            .collect::<String>()
            .to_ascii_uppercase();
        match norm.as_str() {
            "GM11" | "GM" => Ok(ModelKind::Gm11),
            "GVM" => Ok(ModelKind::Gvm),
            "GMS" => Ok(ModelKind::GmS),
            "GMC" => Ok(ModelKind::GmC),
            "GMSC" => Ok(ModelKind::GmSc),
            "GMESC" => Ok(ModelKind::GmEsc),
            _ => Err(GreyError::invalid(format!("unknown grey model `{s}`"))),
        }
    }
}

/// Right-hand side of a trigonometric whitenization equation:
/// `damp(t) * (sin*sin(wt) + cos*cos(wt)) + constant`, `damp(t) = e^{-at}` or 1.
#[derive(Debug, Clone, Copy)]
struct Forcing {
    sin: f64,
    cos: f64,
    constant: f64,
    damped: bool,
}

/// Estimated parameters of one grey model on one window.
#[derive(Debug, Clone, PartialEq)]
pub struct GreyFit {
    kind: ModelKind,
    a: f64,
    b: Option<f64>,
    b1: Option<f64>,
    b2: Option<f64>,
    b3: Option<f64>,
    omega: Option<f64>,
    x0_1: f64,
    k_const: Option<f64>,
    window_len: usize,
}

impl GreyFit {
    pub fn gm11(a: f64, b: f64, x0_1: f64, window_len: usize) -> Result<Self> {
        Self::checked(Self {
            kind: ModelKind::Gm11,
            a,
            b: Some(b),
            b1: None,
            b2: None,
            b3: None,
            omega: None,
            x0_1,
            k_const: None,
            window_len,
        })
    }

    pub fn gvm(a: f64, b: f64, x0_1: f64, window_len: usize) -> Result<Self> {
        Self::checked(Self {
            kind: ModelKind::Gvm,
            ..Self::gm11(a, b, x0_1, window_len)?
        })
    }

    /// Trigonometric model from its coefficients, in the order of the design
    /// matrix columns after `a`: `(b1, b2)` for GM_S / GM_C,
    /// `(b1, b2, b3)` for GM_SC / GM_ESC. The integration constant is derived.
    pub fn trig(
        kind: ModelKind,
        a: f64,
        coeffs: &[f64],
        omega: f64,
        x0_1: f64,
        window_len: usize,
    ) -> Result<Self> {
        let expected = match kind {
            ModelKind::GmS | ModelKind::GmC => 2,
            ModelKind::GmSc | ModelKind::GmEsc => 3,
            _ => {
                return Err(GreyError::invalid(format!(
                    "{kind} is not a trigonometric model"
                )))
            }
        };
        if coeffs.len() != expected {
            return Err(GreyError::invalid(format!(
                "{kind} takes {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(GreyError::invalid(format!(
                "omega must be positive and finite, got {omega}"
            )));
        }
        let mut fit = Self {
            kind,
            a,
            b: None,
            b1: Some(coeffs[0]),
            b2: Some(coeffs[1]),
            b3: coeffs.get(2).copied(),
            omega: Some(omega),
            x0_1,
            k_const: None,
            window_len,
        };
        fit.k_const = fit.integration_constant();
        Self::checked(fit)
    }

    fn checked(self) -> Result<Self> {
        if self.window_len < MIN_WINDOW {
            return Err(GreyError::InsufficientData {
                needed: MIN_WINDOW,
                got: self.window_len,
            });
        }
        let present = [Some(self.a), self.b, self.b1, self.b2, self.b3, self.omega, Some(self.x0_1)];
        if let Some(index) = present.iter().flatten().position(|v| !v.is_finite()) {
            return Err(GreyError::NonFinite { index });
        }
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Development coefficient.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Grey input of GM(1,1) and the quadratic coefficient of GVM.
    pub fn b(&self) -> Option<f64> {
        self.b
    }

    pub fn b1(&self) -> Option<f64> {
        self.b1
    }

    pub fn b2(&self) -> Option<f64> {
        self.b2
    }

    pub fn b3(&self) -> Option<f64> {
        self.b3
    }

    pub fn omega(&self) -> Option<f64> {
        self.omega
    }

    /// First window observation, the initial condition of the accumulated series.
    pub fn x0_1(&self) -> f64 {
        self.x0_1
    }

    /// Integration constant `K` of the trigonometric solutions
    /// (`x1(t) = K e^{-at} + particular(t)`); absent when `a` is degenerate.
    pub fn integration_constant_k(&self) -> Option<f64> {
        self.k_const
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// The trig coefficients with the sinusoidal parts zeroed; used to compare
    /// against plain GM(1,1).
    pub fn without_harmonics(&self) -> Result<Self> {
        match self.forcing() {
            Some(f) => {
                let coeffs: Vec<f64> = match self.kind {
                    ModelKind::GmS | ModelKind::GmC => vec![0.0, f.constant],
                    _ => vec![0.0, 0.0, f.constant],
                };
                Self::trig(
                    self.kind,
                    self.a,
                    &coeffs,
                    self.omega.unwrap_or(1.0),
                    self.x0_1,
                    self.window_len,
                )
            }
            None => Ok(self.clone()),
        }
    }

    fn forcing(&self) -> Option<Forcing> {
        let (b1, b2) = (self.b1?, self.b2?);
        Some(match self.kind {
            ModelKind::GmS => Forcing { sin: b1, cos: 0.0, constant: b2, damped: false },
            ModelKind::GmC => Forcing { sin: 0.0, cos: b1, constant: b2, damped: false },
            ModelKind::GmSc => Forcing { sin: b1, cos: b2, constant: self.b3?, damped: false },
            ModelKind::GmEsc => Forcing { sin: b1, cos: b2, constant: self.b3?, damped: true },
            ModelKind::Gm11 | ModelKind::Gvm => return None,
        })
    }

    /// Closed-form `K` from the initial condition.
    ///
    /// Undamped: `K = e^a (x(1) - P sin(w) - Q cos(w) - c/a)` with
    /// `P = (a*bs + w*bc)/(a^2+w^2)`, `Q = (a*bc - w*bs)/(a^2+w^2)`.
    /// Damped: `K = e^a (x(1) - c/a) + (b1 cos(w) - b2 sin(w))/w`.
    fn integration_constant(&self) -> Option<f64> {
        let f = self.forcing()?;
        let (a, w) = (self.a, self.omega?);
        if a.abs() <= DEGENERATE_A {
            return None;
        }
        if f.damped {
            Some(a.exp() * (self.x0_1 - f.constant / a) + damped_primitive(&f, w, 1.0))
        } else {
            let h1 = undamped_particular(&f, a, w, 1.0);
            Some(a.exp() * (self.x0_1 - h1 - f.constant / a))
        }
    }

    /// Accumulated time response `x1_hat(t)`; equals `x0_1` at `t = 1`.
    pub fn accumulated(&self, t: f64) -> f64 {
        let a = self.a;
        let s = t - 1.0;
        let x0 = self.x0_1;
        match self.kind {
            ModelKind::Gm11 => (-a * s).exp() * x0 + self.b.unwrap_or(0.0) * relax(a, s),
            ModelKind::Gvm => {
                let b = self.b.unwrap_or(0.0);
                x0 / ((a * s).exp() - b * x0 * grow(a, s))
            }
            _ => {
                let f = self.forcing().expect("trig model carries coefficients");
                let w = self.omega.expect("trig model carries omega");
                let decay = (-a * s).exp();
                let transient = if f.damped {
                    // x1 = K e^{-at} - e^{-at} g(t) + c/a, g the primitive of the harmonic part
                    (-a).exp() * damped_primitive(&f, w, 1.0) * decay
                        - (-a * t).exp() * damped_primitive(&f, w, t)
                } else {
                    undamped_particular(&f, a, w, t) - undamped_particular(&f, a, w, 1.0) * decay
                };
                x0 * decay + transient + f.constant * relax(a, s)
            }
        }
    }

    /// `x0_hat(j) = x1_hat(j) - x1_hat(j-1)` for a window index `j >= 2`;
    /// `j = w + 1` is the one-step-ahead forecast.
    pub fn predict_at(&self, j: usize) -> Result<f64> {
        if j < 2 {
            return Err(GreyError::invalid(format!(
                "restored values start at index 2, got {j}"
            )));
        }
        match self.kind {
            ModelKind::Gm11 => forecast_gm11(self, j - 1),
            // the Verhulst product form at k equals x1_hat(k) - x1_hat(k-1)
            ModelKind::Gvm => forecast_gvm(self, j),
            _ => forecast_trig(self, j - 1),
        }
    }

    /// Forecast `horizon` steps past the end of the fitted window, without refitting.
    pub fn forecast_ahead(&self, horizon: usize) -> Result<f64> {
        if horizon == 0 {
            return Err(GreyError::invalid("forecast horizon must be at least 1"));
        }
        self.predict_at(self.window_len + horizon)
    }

    /// `x(j) - x0_hat(j)` for j = 2..w of the window the model was fitted on.
    pub fn in_sample_residuals(&self, window: &[f64]) -> Result<Vec<f64>> {
        (2..=window.len())
            .map(|j| Ok(window[j - 1] - self.predict_at(j)?))
            .collect()
    }
}

/// `(1 - e^{-a s}) / a`, continuous through `a = 0`.
fn relax(a: f64, s: f64) -> f64 {
    if a.abs() <= DEGENERATE_A {
        s
    } else {
        -(-a * s).exp_m1() / a
    }
}

/// `(e^{a s} - 1) / a`, continuous through `a = 0`.
fn grow(a: f64, s: f64) -> f64 {
    if a.abs() <= DEGENERATE_A {
        s
    } else {
        (a * s).exp_m1() / a
    }
}

fn undamped_particular(f: &Forcing, a: f64, w: f64, t: f64) -> f64 {
    let den = a * a + w * w;
    let p = (a * f.sin + w * f.cos) / den;
    let q = (a * f.cos - w * f.sin) / den;
    p * (w * t).sin() + q * (w * t).cos()
}

fn damped_primitive(f: &Forcing, w: f64, t: f64) -> f64 {
    (f.sin * (w * t).cos() - f.cos * (w * t).sin()) / w
}

fn ensure_finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(GreyError::NumericalDegeneracy(format!(
            "{what} evaluated to {value}"
        )))
    }
}

/// GM(1,1) forecast `x0_hat(k+1) = (1 - e^a)(x(1) - b/a) e^{-ak}`; returns `b`
/// when `|a| <= 1e-12`.
pub fn forecast_gm11(fit: &GreyFit, k: usize) -> Result<f64> {
    if fit.kind != ModelKind::Gm11 {
        return Err(GreyError::invalid(format!("{} is not GM(1,1)", fit.kind)));
    }
    if k < 1 {
        return Err(GreyError::invalid("GM(1,1) forecast index k must be >= 1"));
    }
    let (a, b, x0) = (fit.a, fit.b.unwrap_or(0.0), fit.x0_1);
    if a.abs() <= DEGENERATE_A {
        return Ok(b);
    }
    // (1 - e^a)(x0 - b/a) rewritten with expm1 to avoid the b/a cancellation
    let e = a.exp_m1();
    let value = (-a * k as f64).exp() * (b * e / a - x0 * e);
    ensure_finite(value, "GM(1,1) forecast")
}

/// Grey Verhulst forecast, the product form
/// `[a x(1)(a - b x(1)) / D(k-1)] * [(1 - e^a) e^{a(k-2)} / D(k-2)]`
/// with `D(j) = b x(1) + (a - b x(1)) e^{aj}`, for `k >= 2`.
///
/// This equals `x1_hat(k) - x1_hat(k-1)` of the Verhulst time response, so
/// the value at `k = w + 1` is the one-step-ahead forecast of a window of `w`.
pub fn forecast_gvm(fit: &GreyFit, k: usize) -> Result<f64> {
    if fit.kind != ModelKind::Gvm {
        return Err(GreyError::invalid(format!("{} is not GVM", fit.kind)));
    }
    if k < 2 {
        return Err(GreyError::invalid("GVM forecast index k must be >= 2"));
    }
    let (a, b, x0) = (fit.a, fit.b.unwrap_or(0.0), fit.x0_1);
    let bx = b * x0;
    let e1 = (a * (k - 1) as f64).exp();
    let e2 = (a * (k - 2) as f64).exp();
    let d1 = bx + (a - bx) * e1;
    let d2 = bx + (a - bx) * e2;
    if !(d1.abs() > DEGENERATE_DENOMINATOR) {
        return Err(GreyError::NumericalDegeneracy(format!(
            "GVM first denominator b*x(1) + (a - b*x(1))e^(a(k-1)) = {d1}"
        )));
    }
    if !(d2.abs() > DEGENERATE_DENOMINATOR) {
        return Err(GreyError::NumericalDegeneracy(format!(
            "GVM second denominator b*x(1) + (a - b*x(1))e^(a(k-2)) = {d2}"
        )));
    }
    let first = a * x0 * (a - bx) / d1;
    let second = (1.0 - a.exp()) * e2 / d2;
    ensure_finite(first * second, "GVM forecast")
}

/// Trigonometric model forecast `x0_hat(k+1) = x1_hat(k+1) - x1_hat(k)`.
pub fn forecast_trig(fit: &GreyFit, k: usize) -> Result<f64> {
    if !fit.kind.is_trigonometric() {
        return Err(GreyError::invalid(format!(
            "{} is not a trigonometric model",
            fit.kind
        )));
    }
    if k < 1 {
        return Err(GreyError::invalid("forecast index k must be >= 1"));
    }
    let k = k as f64;
    let value = fit.accumulated(k + 1.0) - fit.accumulated(k);
    ensure_finite(value, &format!("{} forecast", fit.kind))
}

#[cfg(test)]
mod tests;
