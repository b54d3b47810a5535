//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Forcing of a linear first-order ODE `x' = -a x + f(t)`.
#[derive(Debug, Clone, Copy)]
pub struct Whitenization {
    pub a: f64,
    pub sin: f64,
    pub cos: f64,
    pub constant: f64,
    pub omega: f64,
    pub damped: bool,
}

impl Whitenization {
    fn rhs(&self, t: f64, x: f64) -> f64 {
        let damp = if self.damped { (-self.a * t).exp() } else { 1.0 };
        -self.a * x
            + damp * (self.sin * (self.omega * t).sin() + self.cos * (self.omega * t).cos())
            + self.constant
    }
}

/// Dormand-Prince 5(4) with step-size control, integrating from `t = 1`
/// with `x(1) = x1` and reporting `x` at every requested time (ascending, >= 1).
pub fn integrate(ode: &Whitenization, x1: f64, times: &[f64], tol: f64) -> Vec<f64> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let (mut t, mut x) = (1.0f64, x1);
    let mut h: f64 = 1e-3;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let step = h.min(target - t);
            let mut k = [0.0f64; 7];
            for i in 0..7 {
                let xi = x + step * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
                k[i] = ode.rhs(t + C[i] * step, xi);
            }
            let x5 = x + step * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
            let x4 = x + step * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
            let err = (x5 - x4).abs() / (tol * (1.0 + x.abs().max(x5.abs())));
            if err <= 1.0 {
                t = if step == target - t { target } else { t + step };
                x = x5;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (step * factor).max(1e-10);
        }
        out.push(x);
    }
    out
}

/// One-step ARMA forecast of a (differenced, demeaned) series by the
/// innovations recursion with zero pre-sample values and shocks. `ar` is the
/// full AR polynomial tail (`w_t = sum ar_i w_{t-i} + e_t - sum ma_j e_{t-j}`).
pub fn innovations_forecast(w: &[f64], ar: &[f64], ma: &[f64]) -> f64 {
    let mut e = Vec::with_capacity(w.len());
    let predict = |t: usize, e: &[f64]| {
        let mut v = 0.0;
        for (i, phi) in ar.iter().enumerate() {
            if t > i {
                v += phi * w[t - 1 - i];
            }
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                v -= theta * e[t - 1 - j];
            }
        }
        v
    };
    for t in 0..w.len() {
        let p = predict(t, &e);
        e.push(w[t] - p);
    }
    predict(w.len(), &e)
}

/// Product of `1 - sum p_i B^i` and `1 - sum s_j B^{s j}` returned as AR tail.
pub fn ar_tail(phi: &[f64], seasonal: &[f64], period: usize) -> Vec<f64> {
    let mut poly = vec![0.0; 1 + phi.len() + seasonal.len() * period];
    poly[0] = 1.0;
    for (i, p) in phi.iter().enumerate() {
        poly[i + 1] -= p;
    }
    let mut full = vec![0.0; poly.len()];
    for (i, &a) in poly.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        full[i] += a;
        for (j, s) in seasonal.iter().enumerate() {
            let idx = i + (j + 1) * period;
            if idx < full.len() {
                full[idx] -= a * s;
            }
        }
    }
    full[1..].iter().map(|c| -c).collect()
}

/// Uniform draw from `[lo, hi]`, rejecting `|v| < exclude`.
pub fn uniform_excluding(r: &mut ChaCha8Rng, lo: f64, hi: f64, exclude: f64) -> f64 {
    loop {
        let v = r.random_range(lo..=hi);
        if v.abs() >= exclude {
            return v;
        }
    }
}

/// Sequence satisfying the basic grey form `x(k) + a z1(k) = b` exactly.
pub fn basic_form(a: f64, b: f64, x1: f64, n: usize) -> Vec<f64> {
    let mut out = vec![x1];
    let mut acc = x1;
    for _ in 1..n {
        let v = (b - a * acc) / (1.0 + a / 2.0);
        acc += v;
        out.push(v);
    }
    out
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// Random non-negative basic-form window: `a` in [-0.5, 0.5] away from 0,
/// `b` in [0.1, 10], and a start value that keeps every term non-negative
/// (`x1 <= b/a` when `a > 0`).
pub fn random_basic_form(r: &mut ChaCha8Rng, len: usize) -> (f64, f64, Vec<f64>) {
    let a = uniform_excluding(r, -0.5, 0.5, 1e-3);
    let b = r.random_range(0.1..=10.0);
    let cap = if a > 0.0 { (b / a).min(20.0) } else { 20.0 };
    let x1 = r.random_range(0.05..=1.0) * cap;
    (a, b, basic_form(a, b, x1, len))
}
