use super::*;
use crate::series::Series;
use proptest::prelude::*;

fn series(v: &[f64]) -> Series {
    Series::from_values(v.to_vec()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// x(k) = (b - a*x1(k-1)) / (1 + a/2): satisfies the basic form exactly.
fn basic_form(a: f64, b: f64, x1: f64, n: usize) -> Vec<f64> {
    let mut out = vec![x1];
    let mut acc = x1;
    while out.len() < n {
        let v = (b - a * acc) / (1.0 + a / 2.0);
        acc += v;
        out.push(v);
    }
    out
}

#[test]
fn names_and_defaults() {
    assert_eq!(ModelKind::Gm11.short_name(), "GM(1,1)");
    assert_eq!(ModelKind::Gm11.corrected_name(), "EFGM");
    assert_eq!(ModelKind::GmEsc.corrected_name(), "EFGM_ESC");
    for kind in ModelKind::ALL {
        assert_eq!(kind.corrected_name(), format!("EF{}", kind.short_name().replace("(1,1)", "")));
        assert_eq!(kind.short_name().parse::<ModelKind>().unwrap(), kind);
    }
    assert_eq!(ModelKind::GmS.default_omega(), Some(4.30));
    assert_eq!(ModelKind::GmC.default_omega(), Some(2.65));
    assert_eq!(ModelKind::GmSc.default_omega(), Some(9.30));
    assert_eq!(ModelKind::GmEsc.default_omega(), Some(74.10));
    assert_eq!(ModelKind::GmSc.min_window(), 5);
    assert_eq!(ModelKind::GmC.min_window(), 4);
    assert!("GM_X".parse::<ModelKind>().is_err());
}

#[test]
fn gm11_constant_window_is_degenerate() {
    let fit = fit_gm11(&series(&[2.0, 2.0, 2.0, 2.0])).unwrap();
    assert!(fit.a().abs() <= DEGENERATE_A, "a = {}", fit.a());
    assert!(close(fit.b().unwrap(), 2.0, 1e-13));
    for k in 1..10 {
        assert_eq!(forecast_gm11(&fit, k).unwrap(), fit.b().unwrap());
    }
}

#[test]
fn gm11_rounded_exponential_window() {
    // normal-equations oracle in 40-digit arithmetic
    let fit = fit_gm11(&series(&[1.0, 1.809524, 1.637188, 1.481266])).unwrap();
    assert!(close(fit.a(), 0.099_999_914_265_029_38, 1e-10));
    assert!(close(fit.b().unwrap(), 1.999_999_860_300_608_2, 1e-10));
    assert_eq!(fit.x0_1(), 1.0);
    assert_eq!(fit.window_len(), 4);
}

#[test]
fn gm11_exact_generator_recovery() {
    let x = basic_form(0.1, 2.0, 1.0, 4);
    let fit = fit_gm11(&series(&x)).unwrap();
    assert!(close(fit.a(), 0.1, 1e-12));
    assert!(close(fit.b().unwrap(), 2.0, 1e-12));
}

#[test]
fn gm11_forecast_examples() {
    let fit = GreyFit::gm11(0.0, 2.0, 7.0, 4).unwrap();
    assert_eq!(forecast_gm11(&fit, 3).unwrap(), 2.0);
    let fit = GreyFit::gm11(0.1, 2.0, 1.0, 4).unwrap();
    assert!(close(forecast_gm11(&fit, 4).unwrap(), 1.339_465_318_275_492_7, 1e-13));
    let fit = GreyFit::gm11(-0.1, 1.0, 1.0, 4).unwrap();
    assert!(close(forecast_gm11(&fit, 1).unwrap(), 1.156_880_098_832_123_9, 1e-13));
    assert!(forecast_gm11(&fit, 0).is_err());
}

#[test]
fn gm11_design_has_w_minus_one_rows() {
    for w in 4..10 {
        let x: Vec<f64> = (0..w).map(|i| 3.0 + (i as f64).sin()).collect();
        let acc = crate::series::accumulate_values(&x).unwrap();
        assert_eq!(crate::series::mean_sequence(&acc).unwrap().len(), w - 1);
    }
}

#[test]
fn short_or_negative_windows_rejected() {
    assert!(matches!(
        fit_gm11(&series(&[1.0, 2.0, 3.0])),
        Err(GreyError::InsufficientData { needed: 4, got: 3 })
    ));
    assert!(matches!(
        fit_gm11(&series(&[1.0, -2.0, 3.0, 4.0])),
        Err(GreyError::InvalidInput(_))
    ));
    assert!(matches!(
        fit_gvm(&series(&[1.0, 0.0, 3.0, 4.0])),
        Err(GreyError::InvalidInput(_))
    ));
    assert!(matches!(
        fit_trig(&series(&[1.0, 2.0, 3.0, 4.0]), ModelKind::GmSc, 9.3),
        Err(GreyError::InsufficientData { needed: 5, got: 4 })
    ));
    assert!(fit_trig(&series(&[1.0, 2.0, 3.0, 4.0]), ModelKind::GmC, 0.0).is_err());
    assert!(fit_trig(&series(&[1.0, 2.0, 3.0, 4.0]), ModelKind::GmEsc, 1.0).is_err());
}

#[test]
fn gvm_fit_and_forecast() {
    let fit = fit_gvm(&series(&[1.0, 1.8, 2.4, 2.7])).unwrap();
    assert!(close(fit.a(), -1.018_849_480_035_080_6, 1e-10));
    assert!(close(fit.b().unwrap(), -0.093_744_260_569_515_06, 1e-10));
    assert!(close(forecast_gvm(&fit, 4).unwrap(), 2.668_157_937_776_043, 1e-9));
    assert!(close(forecast_gvm(&fit, 5).unwrap(), 1.885_951_990_839_962_6, 1e-9));
    assert_eq!(fit.forecast_ahead(1).unwrap(), forecast_gvm(&fit, 5).unwrap());
    assert!(forecast_gvm(&fit, 1).is_err());
}

#[test]
fn gvm_design_second_column_is_square_of_first() {
    let x = [1.0, 1.8, 2.4, 2.7];
    let acc = crate::series::accumulate_values(&x).unwrap();
    let z = crate::series::mean_sequence(&acc).unwrap();
    let expected = [(-1.9, 3.61), (-4.0, 16.0), (-6.55, 42.9025)];
    for (&zk, (c0, c1)) in z.values().iter().zip(expected) {
        assert!(close(-zk, c0, 1e-15));
        assert!(close(zk * zk, c1, 1e-14));
        assert_eq!((-zk) * (-zk), zk * zk);
    }
}

#[test]
fn gvm_constant_window_is_finite() {
    let fit = fit_gvm(&series(&[2.0, 2.0, 2.0, 2.0])).unwrap();
    assert!(fit.a().is_finite() && fit.b().unwrap().is_finite());
}

#[test]
fn gvm_limits() {
    // b = 0: x(1)(1 - e^a) e^{-a(k-1)}
    for (a, k) in [(0.3, 4usize), (-0.2, 6), (0.05, 2)] {
        let fit = GreyFit::gvm(a, 0.0, 2.5, 4).unwrap();
        let limit = 2.5 * (1.0 - f64::exp(a)) * f64::exp(-a * (k as f64 - 1.0));
        assert!(close(forecast_gvm(&fit, k).unwrap(), limit, 1e-6));
    }
    // a = b x(1): numerator vanishes, denominators are constant
    let fit = GreyFit::gvm(0.4, 0.2, 2.0, 4).unwrap();
    let v = forecast_gvm(&fit, 5).unwrap();
    assert!(v.is_finite() && v.abs() < 1e-15);
    // a = 0 with b x(1) != 0 collapses both denominators
    let fit = GreyFit::gvm(0.0, 0.3, 2.0, 4).unwrap();
    assert!(matches!(
        forecast_gvm(&fit, 4),
        Err(GreyError::NumericalDegeneracy(msg)) if msg.contains("first")
    ));
}

#[test]
fn gvm_product_form_is_difference_of_time_response() {
    let fit = fit_gvm(&series(&[1.0, 1.8, 2.4, 2.7])).unwrap();
    for k in 2..9 {
        let diff = fit.accumulated(k as f64) - fit.accumulated(k as f64 - 1.0);
        assert!(close(forecast_gvm(&fit, k).unwrap(), diff, 1e-12), "k = {k}");
    }
}

#[test]
fn gm_c_on_exponential_data_has_no_harmonic() {
    let x = basic_form(0.1, 2.0, 1.0, 6);
    let fit = fit_trig(&series(&x), ModelKind::GmC, 2.65).unwrap();
    assert!(fit.b1().unwrap().abs() <= 1e-6);
    assert!(close(fit.a(), 0.1, 1e-9));
    assert!(close(fit.b2().unwrap(), 2.0, 1e-9));
}

#[test]
fn esc_on_exponential_data_has_no_harmonic() {
    let x = basic_form(0.1, 2.0, 1.0, 6);
    let fit = fit_esc(&series(&x), 74.10).unwrap();
    assert!(fit.b1().unwrap().abs() <= 1e-6 && fit.b2().unwrap().abs() <= 1e-6);
    assert!(close(fit.a(), 0.1, 1e-9));
    assert!(close(fit.b3().unwrap(), 2.0, 1e-9));
}

#[test]
fn esc_second_stage_uses_plain_harmonics_when_a_is_zero() {
    // constant window: stage one gives a = 0, so the damping factor is 1
    let fit = fit_esc(&series(&[3.0, 3.0, 3.0, 3.0, 3.0]), 1.3).unwrap();
    assert!(fit.a().abs() <= 1e-12);
    assert!(fit.b1().unwrap().abs() < 1e-12 && fit.b2().unwrap().abs() < 1e-12);
}

#[test]
fn trig_design_uses_local_index() {
    // a window whose residual after GM(1,1) is exactly sin(w k), k = 2..w
    let w = 0.7;
    let (a, b2, b1) = (0.2, 5.0, 1.5);
    let mut x = vec![4.0];
    let mut acc = 4.0;
    for k in 2..=6 {
        // x(k) + a (acc + x(k)/2) = b1 sin(wk) + b2
        let v = (b1 * (w * k as f64).sin() + b2 - a * acc) / (1.0 + a / 2.0);
        acc += v;
        x.push(v);
    }
    let fit = fit_trig(&series(&x), ModelKind::GmS, w).unwrap();
    assert!(close(fit.a(), a, 1e-10));
    assert!(close(fit.b1().unwrap(), b1, 1e-10));
    assert!(close(fit.b2().unwrap(), b2, 1e-10));
}

/// Classical RK4 with a fine fixed step; test-local, independent of the closed forms.
fn rk4(f: impl Fn(f64, f64) -> f64, x0: f64, t_end: f64, steps_per_unit: usize) -> f64 {
    let n = ((t_end - 1.0) * steps_per_unit as f64).round() as usize;
    let h = (t_end - 1.0) / n as f64;
    let (mut t, mut x) = (1.0, x0);
    for _ in 0..n {
        let k1 = f(t, x);
        let k2 = f(t + h / 2.0, x + h / 2.0 * k1);
        let k3 = f(t + h / 2.0, x + h / 2.0 * k2);
        let k4 = f(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    x
}

#[test]
fn gm_s_and_gm_c_match_ode_oracle() {
    let fit = GreyFit::trig(ModelKind::GmS, 0.1, &[0.5, 2.0], 4.3, 1.0, 4).unwrap();
    let v = forecast_trig(&fit, 4).unwrap();
    assert!(close(v, 1.439_878_356_613_535_1, 1e-9), "{v}");
    let rhs = |t: f64, x: f64| -0.1 * x + 0.5 * (4.3 * t).sin() + 2.0;
    let ode = rk4(rhs, 1.0, 5.0, 4000) - rk4(rhs, 1.0, 4.0, 4000);
    assert!(close(v, ode, 1e-6));

    let fit = GreyFit::trig(ModelKind::GmC, 0.1, &[0.5, 2.0], 2.65, 1.0, 4).unwrap();
    let v = forecast_trig(&fit, 4).unwrap();
    assert!(close(v, 1.646_408_523_382_670_5, 1e-9), "{v}");
}

#[test]
fn gm_c_constant_matches_closed_form() {
    // K = e^a [x(1) - (a^2 b2 + b2 w^2 + a^2 b1 cos w + a b1 w sin w) / (a (a^2 + w^2))]
    for &(a, b1, b2, w, x0) in &[(0.1, 0.5, 2.0, 2.65, 1.0), (-0.3, -1.2, 4.0, 9.3, 7.5)] {
        let fit = GreyFit::trig(ModelKind::GmC, a, &[b1, b2], w, x0, 4).unwrap();
        let expected = f64::exp(a)
            * (x0
                - (a * a * b2 + b2 * w * w + a * a * b1 * w.cos() + a * b1 * w * w.sin())
                    / (a * (a * a + w * w)));
        assert!(close(fit.integration_constant_k().unwrap(), expected, 1e-12));
        // the K-based solution agrees with the response used for forecasting
        let particular = |t: f64| {
            (a * a * b2 + b2 * w * w + a * a * b1 * (w * t).cos() + a * b1 * w * (w * t).sin())
                / (a * (a * a + w * w))
        };
        for t in [1.0, 2.0, 3.5, 7.0] {
            let via_k = expected * f64::exp(-a * t) + particular(t);
            assert!(close(fit.accumulated(t), via_k, 1e-10));
        }
    }
}

#[test]
fn esc_constant_matches_solution() {
    let (a, b1, b2, b3, w, x0) = (0.2, 0.7, -0.4, 3.0, 74.1, 2.0);
    let fit = GreyFit::trig(ModelKind::GmEsc, a, &[b1, b2, b3], w, x0, 4).unwrap();
    let k = fit.integration_constant_k().unwrap();
    for t in [1.0, 2.0, 5.0] {
        let g = (b1 * (w * t).cos() - b2 * (w * t).sin()) / w;
        let via_k = k * f64::exp(-a * t) - f64::exp(-a * t) * g + b3 / a;
        assert!(close(fit.accumulated(t), via_k, 1e-10));
    }
    let degenerate = GreyFit::trig(ModelKind::GmEsc, 0.0, &[b1, b2, b3], w, x0, 4).unwrap();
    assert!(degenerate.integration_constant_k().is_none());
}

#[test]
fn gm_s_difference_formula_agrees_with_solution() {
    // difference of x1 = e^{-a(t-1)}(x(1) - h(1)) + h(t) + c(1 - e^{-a(t-1)})/a with
    // h = b1 (a sin wt - w cos wt)/(a^2 + w^2)
    let (a, b1, c, w, x0) = (0.25, 1.3, 6.0, 4.3, 3.0);
    let fit = GreyFit::trig(ModelKind::GmS, a, &[b1, c], w, x0, 4).unwrap();
    let h = |t: f64| b1 * (a * (w * t).sin() - w * (w * t).cos()) / (a * a + w * w);
    for k in 1..12 {
        let kf = k as f64;
        let closed = (1.0 - f64::exp(a)) * (x0 - h(1.0) - c / a) * f64::exp(-a * kf)
            + (h(kf + 1.0) - h(kf));
        assert!(close(forecast_trig(&fit, k).unwrap(), closed, 1e-9), "k = {k}");
    }
}

#[test]
fn degenerate_a_trig_is_linear_drift_plus_integrated_harmonics() {
    let (bs, bc, c, w, x0) = (0.8, -0.5, 2.0, 1.7, 3.0);
    let fit = GreyFit::trig(ModelKind::GmSc, 0.0, &[bs, bc, c], w, x0, 5).unwrap();
    for t in [1.0, 2.0, 4.5] {
        let expected = x0 + c * (t - 1.0) + bs * (w.cos() - (w * t).cos()) / w
            + bc * ((w * t).sin() - w.sin()) / w;
        assert!(close(fit.accumulated(t), expected, 1e-12));
    }
    assert!(fit.integration_constant_k().is_none());
}

#[test]
fn initial_condition_is_exact() {
    let fits = [
        GreyFit::gm11(0.3, 2.0, 1.234_567, 4).unwrap(),
        GreyFit::gvm(-0.8, -0.05, 1.234_567, 4).unwrap(),
        GreyFit::trig(ModelKind::GmS, 0.3, &[0.4, 2.0], 4.3, 1.234_567, 4).unwrap(),
        GreyFit::trig(ModelKind::GmC, -0.3, &[0.4, 2.0], 2.65, 1.234_567, 4).unwrap(),
        GreyFit::trig(ModelKind::GmSc, 0.7, &[0.4, 0.1, 2.0], 9.3, 1.234_567, 5).unwrap(),
        GreyFit::trig(ModelKind::GmEsc, 0.7, &[0.4, 0.1, 2.0], 74.1, 1.234_567, 4).unwrap(),
    ];
    for fit in fits {
        assert_eq!(fit.accumulated(1.0), 1.234_567, "{}", fit.kind());
    }
}

#[test]
fn zero_harmonics_reduce_to_gm11() {
    let gm = GreyFit::gm11(0.15, 3.0, 2.0, 4).unwrap();
    for (kind, coeffs) in [
        (ModelKind::GmS, vec![0.0, 3.0]),
        (ModelKind::GmC, vec![0.0, 3.0]),
        (ModelKind::GmSc, vec![0.0, 0.0, 3.0]),
        (ModelKind::GmEsc, vec![0.0, 0.0, 3.0]),
    ] {
        let fit = GreyFit::trig(kind, 0.15, &coeffs, 2.65, 2.0, 4).unwrap();
        for k in 1..15 {
            let t = forecast_trig(&fit, k).unwrap();
            let g = forecast_gm11(&gm, k).unwrap();
            assert!(close(t, g, 1e-9), "{kind} k={k}: {t} vs {g}");
        }
    }
}

#[test]
fn multi_step_forecast_iterates_closed_form() {
    let fit = GreyFit::gm11(0.1, 2.0, 1.0, 4).unwrap();
    assert_eq!(fit.forecast_ahead(1).unwrap(), forecast_gm11(&fit, 4).unwrap());
    assert_eq!(fit.forecast_ahead(3).unwrap(), forecast_gm11(&fit, 6).unwrap());
    assert!(fit.forecast_ahead(0).is_err());
}

#[test]
fn in_sample_residuals_have_w_minus_one_entries() {
    let x = [3.0, 3.2, 3.1, 3.5, 3.3];
    let fit = fit_values(ModelKind::GmC, &x, Some(2.65)).unwrap();
    let r = fit.in_sample_residuals(&x).unwrap();
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|v| v.is_finite()));
}

#[test]
fn forecasting_wrong_kind_is_rejected() {
    let gm = GreyFit::gm11(0.1, 2.0, 1.0, 4).unwrap();
    assert!(forecast_gvm(&gm, 3).is_err());
    assert!(forecast_trig(&gm, 3).is_err());
    let gv = GreyFit::gvm(0.1, 0.01, 1.0, 4).unwrap();
    assert!(forecast_gm11(&gv, 3).is_err());
}

proptest! {
    #[test]
    fn gm11_consistent_windows_are_recovered(
        a in prop_oneof![-0.5f64..-1e-3, 1e-3f64..0.5],
        b in 0.1f64..10.0,
        x1 in 0.5f64..20.0,
        w in 4usize..9,
    ) {
        let x = basic_form(a, b, x1, w);
        prop_assume!(x.iter().all(|v| *v >= 0.0));
        let fit = fit_gm11(&series(&x)).unwrap();
        prop_assert!((fit.a() - a).abs() <= 1e-9 * a.abs());
        prop_assert!((fit.b().unwrap() - b).abs() <= 1e-9 * b);
    }

    #[test]
    fn positive_windows_never_produce_non_finite_forecasts(
        x in prop::collection::vec(0.01f64..200.0, 5..9),
        kind_ix in 0usize..6,
    ) {
        let kind = ModelKind::ALL[kind_ix];
        match fit_values(kind, &x, kind.default_omega()) {
            Ok(fit) => match fit.forecast_ahead(1) {
                Ok(v) => prop_assert!(v.is_finite()),
                Err(e) => prop_assert!(matches!(e, GreyError::NumericalDegeneracy(_))),
            },
            Err(e) => {
                let expected = matches!(
                    e,
                    GreyError::SingularSystem { .. } | GreyError::NumericalDegeneracy(_)
                );
                prop_assert!(expected, "unexpected error {}", e);
            }
        }
    }
}
