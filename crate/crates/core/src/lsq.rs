//! Small dense least squares via Householder QR.
//!
//! Columns are equilibrated to unit norm before factoring so the condition
//! estimate reflects the geometry of the design rather than the units of the
//! data (accumulated traffic volumes easily reach 1e5 while the constant
//! column stays at 1).

use crate::error::{GreyError, Result};

/// Condition estimate of the normal matrix above which a system is rejected.
pub const MAX_NORMAL_CONDITION: f64 = 1e12;

/// Dense overdetermined system `design * p ~= targets`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresProblem {
    rows: usize,
    cols: usize,
    design: Vec<f64>,
    targets: Vec<f64>,
}

impl LeastSquaresProblem {
    pub fn new(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(GreyError::invalid("design matrix has no columns"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(GreyError::invalid("design matrix rows differ in length"));
        }
        Self::from_row_major(m, n, rows.concat(), targets)
    }

    pub fn from_row_major(
        rows: usize,
        cols: usize,
        design: Vec<f64>,
        targets: Vec<f64>,
    ) -> Result<Self> {
        if cols == 0 || design.len() != rows * cols {
            return Err(GreyError::invalid(format!(
                "design matrix of {} entries does not match {rows}x{cols}",
                design.len()
            )));
        }
        if targets.len() != rows {
            return Err(GreyError::invalid(format!(
                "{} targets for {rows} equations",
                targets.len()
            )));
        }
        if rows < cols {
            return Err(GreyError::InsufficientData {
                needed: cols,
                got: rows,
            });
        }
        if let Some(index) = design
            .iter()
            .chain(targets.iter())
            .position(|v| !v.is_finite())
        {
            return Err(GreyError::NonFinite { index });
        }
        Ok(Self {
            rows,
            cols,
            design,
            targets,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn design(&self) -> &[f64] {
        &self.design
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.design[row * self.cols + col]
    }

    /// Euclidean norm of `design * params - targets`.
    pub fn residual_norm(&self, params: &[f64]) -> f64 {
        self.residuals(params).iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    pub fn residuals(&self, params: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let row = &self.design[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(params).map(|(a, p)| a * p).sum::<f64>() - self.targets[i]
            })
            .collect()
    }
}

/// Minimizes `||design * p - targets||_2`.
///
/// Fails with [`GreyError::SingularSystem`] when the estimated condition
/// number of the (column-equilibrated) normal matrix exceeds
/// [`MAX_NORMAL_CONDITION`].
pub fn solve_least_squares(problem: &LeastSquaresProblem) -> Result<Vec<f64>> {
    let (m, n) = (problem.rows, problem.cols);

    // column-major working copy, equilibrated
    let mut a = vec![0.0; m * n];
    let mut scale = vec![0.0; n];
    for j in 0..n {
        let norm = (0..m)
            .map(|i| problem.entry(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GreyError::SingularSystem {
                condition: f64::INFINITY,
            });
        }
        scale[j] = norm;
        for i in 0..m {
            a[j * m + i] = problem.entry(i, j) / norm;
        }
    }
    let mut diag = vec![0.0; n];
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    for j in 0..n {
        let col = &a[j * m..(j + 1) * m];
        let norm = col[j..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(GreyError::SingularSystem {
                condition: f64::INFINITY,
            });
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        let mut v = col[j..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        diag[j] = alpha;
        if vtv != 0.0 {
            for k in j..n {
                reflect(&v, vtv, &mut a[k * m + j..(k + 1) * m]);
            }
        }
        reflectors.push((v, vtv));
    }

    // R is the upper triangle of `a`; its diagonal is `diag`.
    let r = |i: usize, k: usize| if i == k { diag[i] } else { a[k * m + i] };

    let condition = normal_condition_estimate(n, &r);
    if !condition.is_finite() || condition > MAX_NORMAL_CONDITION {
        return Err(GreyError::SingularSystem { condition });
    }

    let solve = |rhs: &[f64]| {
        let mut y = rhs.to_vec();
        for (j, (v, vtv)) in reflectors.iter().enumerate() {
            if *vtv != 0.0 {
                reflect(v, *vtv, &mut y[j..]);
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let tail: f64 = (i + 1..n).map(|k| r(i, k) * x[k]).sum();
            x[i] = (y[i] - tail) / r(i, i);
        }
        for (xi, s) in x.iter_mut().zip(&scale) {
            *xi /= s;
        }
        x
    };

    // one step of iterative refinement; `residuals` is design * x - targets
    let mut x = solve(&problem.targets);
    let correction = solve(&problem.residuals(&x));
    for (xi, ci) in x.iter_mut().zip(&correction) {
        *xi -= ci;
    }
    Ok(x)
}

/// Applies `I - 2 v v^T / (v^T v)` to `c` in place.
fn reflect(v: &[f64], vtv: f64, c: &mut [f64]) {
    let dot: f64 = v.iter().zip(c.iter()).map(|(p, q)| p * q).sum();
    let f = 2.0 * dot / vtv;
    for (ci, vi) in c.iter_mut().zip(v) {
        *ci -= f * vi;
    }
}

/// `(||R||_F * ||R^-1||_F)^2`, within a factor `n^2` of cond(RᵀR).
fn normal_condition_estimate(n: usize, r: &impl Fn(usize, usize) -> f64) -> f64 {
    let mut r_norm = 0.0;
    for i in 0..n {
        for k in i..n {
            r_norm += r(i, k).powi(2);
        }
    }
    // invert column by column: R * inv_col = e_col
    let mut inv_norm = 0.0;
    let mut col = vec![0.0; n];
    for c in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        for i in (0..=c).rev() {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let tail: f64 = (i + 1..=c).map(|k| r(i, k) * col[k]).sum();
            col[i] = (rhs - tail) / r(i, i);
        }
        inv_norm += col.iter().map(|v| v * v).sum::<f64>();
    }
    r_norm * inv_norm
}
