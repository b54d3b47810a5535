//! Time-series comparison forecasters with fixed coefficients: LINEAR,
//! ARIMA / SARIMA through AR(inf) weights, and two-regime SETAR.

mod arima;
mod threshold;

use std::fmt;

use crate::error::Result;
use crate::series::Series;

pub use arima::{ArimaParams, ArimaSpec, PsiRoute, MIN_TRUNCATION};
pub use threshold::{LinearSpec, SetarSpec};

/// Fixed benchmark coefficients used by the default configuration.
pub mod fixtures {
    use super::*;

    /// LINEAR(3): `0.346 + 0.637 Z_t + 0.146 Z_{t-1} + 0.193 Z_{t-2}`.
    pub fn linear3() -> LinearSpec {
        LinearSpec {
            intercept: 0.346,
            coeffs: vec![0.637, 0.146, 0.193],
            delay: 1,
        }
    }

    /// ARIMA(1,1,2) with phi = -0.749, theta = (-0.363, 0.402).
    pub fn arima_1_1_2() -> ArimaSpec {
        ArimaSpec::new(arima_1_1_2_params()).expect("fixture is invertible")
    }

    pub fn arima_1_1_2_params() -> ArimaParams {
        ArimaParams {
            phi: vec![-0.749],
            theta: vec![-0.363, 0.402],
            d: 1,
            ..ArimaParams::default()
        }
    }

    /// SARIMA(1,0,3)(1,0,0) with season 18 and mean 11.419.
    pub fn sarima_1_0_3_1_0_0() -> ArimaSpec {
        ArimaSpec::new(sarima_params()).expect("fixture is invertible")
    }

    pub fn sarima_params() -> ArimaParams {
        ArimaParams {
            phi: vec![0.990],
            theta: vec![0.377, 0.121, -0.047],
            seasonal_phi: vec![-0.071],
            season_period: 18,
            mu: 11.419,
            ..ArimaParams::default()
        }
    }

    /// SETAR with threshold 12.29 on `X_t = Z_t`.
    pub fn setar() -> SetarSpec {
        SetarSpec {
            low_intercept: 1.215,
            low_coeffs: vec![0.302, 0.337, 0.221],
            high_intercept: 2.905,
            high_coeffs: vec![0.748, -0.053, 0.196],
            threshold: 12.29,
            delay: 0,
        }
    }
}

/// Any benchmark forecaster.
#[derive(Debug, Clone, PartialEq)]
pub enum BenchmarkSpec {
    Linear(LinearSpec),
    Arima(ArimaSpec),
    Sarima(ArimaSpec),
    Setar(SetarSpec),
}

impl BenchmarkSpec {
    pub const NAMES: [&'static str; 4] = ["LINEAR", "SETAR", "SARIMA", "ARIMA"];

    /// The fixture forecaster registered under `name` (case-insensitive).
    pub fn fixture(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "LINEAR" => Some(Self::Linear(fixtures::linear3())),
            "ARIMA" => Some(Self::Arima(fixtures::arima_1_1_2())),
            "SARIMA" => Some(Self::Sarima(fixtures::sarima_1_0_3_1_0_0())),
            "SETAR" => Some(Self::Setar(fixtures::setar())),
            _ => None,
        }
    }

    pub fn all_fixtures() -> Vec<Self> {
        Self::NAMES
            .iter()
            .map(|n| Self::fixture(n).expect("registered fixture"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear(_) => "LINEAR",
            Self::Arima(_) => "ARIMA",
            Self::Sarima(_) => "SARIMA",
            Self::Setar(_) => "SETAR",
        }
    }

    pub fn min_history(&self) -> usize {
        match self {
            Self::Linear(s) => s.min_history(),
            Self::Arima(s) | Self::Sarima(s) => s.min_history(),
            Self::Setar(s) => s.min_history(),
        }
    }

    /// One-step forecast from a history ending at the latest observation.
    pub fn forecast(&self, history: &[f64]) -> Result<f64> {
        match self {
            Self::Linear(s) => s.forecast(history),
            Self::Arima(s) | Self::Sarima(s) => s.forecast(history),
            Self::Setar(s) => s.forecast(history),
        }
    }

    /// Switch ARIMA-family specs to another weight route; others are unchanged.
    pub fn with_psi_route(self, route: PsiRoute) -> Self {
        match self {
            Self::Arima(s) => Self::Arima(s.with_route(route)),
            Self::Sarima(s) => Self::Sarima(s.with_route(route)),
            other => other,
        }
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn psi_weights(spec: &ArimaSpec, count: usize) -> Vec<f64> {
    spec.psi_weights(count)
}

pub fn forecast_arima(spec: &ArimaSpec, history: &Series) -> Result<f64> {
    spec.forecast(history.values())
}

pub fn forecast_setar(spec: &SetarSpec, history: &Series) -> Result<f64> {
    spec.validate()?;
    spec.forecast(history.values())
}

pub fn forecast_linear(spec: &LinearSpec, history: &Series) -> Result<f64> {
    spec.validate()?;
    spec.forecast(history.values())
}
