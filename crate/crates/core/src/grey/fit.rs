use crate::error::{GreyError, Result};
use crate::lsq::{solve_least_squares, LeastSquaresProblem};
use crate::series::{accumulate_values, mean_sequence, Series};

use super::{GreyFit, ModelKind, MIN_WINDOW};

struct Window<'a> {
    x: &'a [f64],
    z: Vec<f64>,
}

impl<'a> Window<'a> {
    fn new(x: &'a [f64], min_len: usize, strictly_positive: bool) -> Result<Self> {
        if x.len() < min_len {
            return Err(GreyError::InsufficientData {
                needed: min_len,
                got: x.len(),
            });
        }
        let acc = accumulate_values(x)?;
        if let Some(i) = x
            .iter()
            .position(|&v| v < 0.0 || (strictly_positive && v == 0.0))
        {
            return Err(GreyError::invalid(format!(
                "window value {} at position {} must be {}",
                x[i],
                i + 1,
                if strictly_positive { "positive" } else { "non-negative" }
            )));
        }
        let z = mean_sequence(&acc)?.values().to_vec();
        Ok(Self { x, z })
    }

    /// Within-window index of row `r`: rows cover k = 2..w.
    fn k(r: usize) -> f64 {
        (r + 2) as f64
    }

    fn solve(&self, cols: usize, row: impl Fn(usize, f64) -> Vec<f64>) -> Result<Vec<f64>> {
        let rows = self.z.len();
        let mut design = Vec::with_capacity(rows * cols);
        for (r, &z) in self.z.iter().enumerate() {
            design.extend(row(r, z));
        }
        let problem =
            LeastSquaresProblem::from_row_major(rows, cols, design, self.x[1..].to_vec())?;
        solve_least_squares(&problem)
    }
}

/// GM(1,1): least squares on `x(k) = -a z(k) + b`, k = 2..w.
pub fn fit_gm11(window: &Series) -> Result<GreyFit> {
    fit_values(ModelKind::Gm11, window.values(), None)
}

/// Grey Verhulst: least squares on `x(k) = -a z(k) + b z(k)^2`.
pub fn fit_gvm(window: &Series) -> Result<GreyFit> {
    fit_values(ModelKind::Gvm, window.values(), None)
}

/// GM_S, GM_C or GM_SC with a fixed angular frequency.
pub fn fit_trig(window: &Series, kind: ModelKind, omega: f64) -> Result<GreyFit> {
    if !matches!(kind, ModelKind::GmS | ModelKind::GmC | ModelKind::GmSc) {
        return Err(GreyError::invalid(format!(
            "fit_trig handles GM_S, GM_C and GM_SC, not {kind}"
        )));
    }
    fit_values(kind, window.values(), Some(omega))
}

/// GM_ESC, estimated in two stages: `(a, b3)` from the plain GM(1,1) design,
/// then `(b1, b2)` from the stage-one residuals on
/// `[e^{-ka} sin(wk), e^{-ka} cos(wk)]`.
pub fn fit_esc(window: &Series, omega: f64) -> Result<GreyFit> {
    fit_values(ModelKind::GmEsc, window.values(), Some(omega))
}

/// Fits any grey model on raw window values. `omega` is required for the
/// trigonometric kinds and ignored otherwise.
pub fn fit_values(kind: ModelKind, x: &[f64], omega: Option<f64>) -> Result<GreyFit> {
    let min_len = kind.min_window().max(MIN_WINDOW);
    let w = x.len();
    if kind != ModelKind::Gvm && w >= min_len && x.iter().all(|&v| v == x[0]) && x[0] >= 0.0 {
        // a constant window solves every non-Verhulst design exactly with a = 0
        return constant_fit(kind, x[0], omega, w);
    }
    match kind {
        ModelKind::Gm11 => {
            let win = Window::new(x, min_len, false)?;
            let p = win.solve(2, |_, z| vec![-z, 1.0])?;
            GreyFit::gm11(p[0], p[1], x[0], w)
        }
        ModelKind::Gvm => {
            let win = Window::new(x, min_len, true)?;
            let p = win.solve(2, |_, z| vec![-z, z * z])?;
            GreyFit::gvm(p[0], p[1], x[0], w)
        }
        ModelKind::GmS | ModelKind::GmC | ModelKind::GmSc => {
            let omega = require_omega(kind, omega)?;
            let win = Window::new(x, min_len, false)?;
            let p = match kind {
                ModelKind::GmS => win.solve(3, |r, z| vec![-z, (omega * Window::k(r)).sin(), 1.0])?,
                ModelKind::GmC => win.solve(3, |r, z| vec![-z, (omega * Window::k(r)).cos(), 1.0])?,
                _ => win.solve(4, |r, z| {
                    let k = Window::k(r);
                    vec![-z, (omega * k).sin(), (omega * k).cos(), 1.0]
                })?,
            };
            GreyFit::trig(kind, p[0], &p[1..], omega, x[0], w)
        }
        ModelKind::GmEsc => {
            let omega = require_omega(kind, omega)?;
            let win = Window::new(x, min_len, false)?;
            let stage1 = win.solve(2, |_, z| vec![-z, 1.0])?;
            let (a, b3) = (stage1[0], stage1[1]);

            let rows = win.z.len();
            let mut design = Vec::with_capacity(rows * 2);
            let mut targets = Vec::with_capacity(rows);
            for (r, &z) in win.z.iter().enumerate() {
                let k = Window::k(r);
                let damp = (-k * a).exp();
                design.push(damp * (omega * k).sin());
                design.push(damp * (omega * k).cos());
                targets.push(x[r + 1] - (-a * z + b3));
            }
            if design.iter().any(|v| !v.is_finite())
                || design.iter().all(|v| v.abs() < f64::MIN_POSITIVE)
            {
                return Err(GreyError::NumericalDegeneracy(format!(
                    "GM_ESC second-stage design e^(-k a) is not representable for a = {a}"
                )));
            }
            let problem = LeastSquaresProblem::from_row_major(rows, 2, design, targets)?;
            let stage2 = solve_least_squares(&problem)?;
            GreyFit::trig(kind, a, &[stage2[0], stage2[1], b3], omega, x[0], w)
        }
    }
}

fn constant_fit(kind: ModelKind, c: f64, omega: Option<f64>, w: usize) -> Result<GreyFit> {
    match kind {
        ModelKind::Gm11 => GreyFit::gm11(0.0, c, c, w),
        ModelKind::GmS | ModelKind::GmC => {
            GreyFit::trig(kind, 0.0, &[0.0, c], require_omega(kind, omega)?, c, w)
        }
        _ => GreyFit::trig(kind, 0.0, &[0.0, 0.0, c], require_omega(kind, omega)?, c, w),
    }
}

fn require_omega(kind: ModelKind, omega: Option<f64>) -> Result<f64> {
    match omega {
        Some(w) if w.is_finite() && w > 0.0 => Ok(w),
        Some(w) => Err(GreyError::invalid(format!(
            "{kind} needs a positive finite omega, got {w}"
        ))),
        None => Err(GreyError::invalid(format!("{kind} needs omega"))),
    }
}
