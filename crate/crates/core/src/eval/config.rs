use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::benchmarks::{fixtures, ArimaParams, ArimaSpec, BenchmarkSpec, LinearSpec, PsiRoute, SetarSpec};
use crate::correction::EfResidualMode;
use crate::error::{GreyError, Result};
use crate::eval::data::DEFAULT_NOISE_SIGMA;
use crate::grey::{ModelKind, MIN_WINDOW};
use crate::rolling::{ModelSpec, OmegaGrid, RollingConfig};

/// The configuration shipped with the library, benchmark fixtures included.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("default_config.toml");

/// Resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub window: usize,
    pub ef_mode: EfResidualMode,
    pub ef_harmonics: Option<usize>,
    pub clamp_non_negative: bool,
    pub omegas: BTreeMap<ModelKind, f64>,
    pub grid: OmegaGrid,
    pub noise_sigma: f64,
    pub seed: u64,
    pub linear: LinearSpec,
    pub arima: ArimaSpec,
    pub sarima: ArimaSpec,
    pub setar: SetarSpec,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            window: MIN_WINDOW,
            ef_mode: EfResidualMode::default(),
            ef_harmonics: None,
            clamp_non_negative: false,
            omegas: ModelKind::ALL
                .iter()
                .filter_map(|&k| Some((k, k.default_omega()?)))
                .collect(),
            grid: OmegaGrid::default(),
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed: 0,
            linear: fixtures::linear3(),
            arima: fixtures::arima_1_1_2(),
            sarima: fixtures::sarima_1_0_3_1_0_0(),
            setar: fixtures::setar(),
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    rolling: Option<RawRolling>,
    omega: Option<BTreeMap<String, f64>>,
    calibration: Option<RawCalibration>,
    augment: Option<RawAugment>,
    linear: Option<LinearSpec>,
    arima: Option<ArimaParams>,
    sarima: Option<ArimaParams>,
    setar: Option<SetarSpec>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRolling {
    window: Option<usize>,
    ef_residual_window: Option<ResidualWindow>,
    ef_harmonics: Option<usize>,
    clamp_nonnegative: Option<bool>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ResidualWindow {
    Len(usize),
    Name(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    lo: f64,
    hi: f64,
    step: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAugment {
    sigma: Option<f64>,
    seed: Option<u64>,
}

fn config_err(e: GreyError) -> GreyError {
    match e {
        GreyError::InvalidInput(m) => GreyError::Config(m),
        other => other,
    }
}

impl Config {
    /// Parses TOML text; sections and keys that are absent keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| GreyError::Config(e.to_string()))?;
        let mut cfg = Config::default();
        let rolling = raw.rolling.unwrap_or_default();
        if let Some(w) = rolling.window {
            cfg.window = w;
        }
        match rolling.ef_residual_window {
            Some(ResidualWindow::Len(r)) => {
                cfg.ef_mode = r.to_string().parse().map_err(config_err)?;
            }
            Some(ResidualWindow::Name(s)) => cfg.ef_mode = s.parse().map_err(config_err)?,
            None => {}
        }
        cfg.ef_harmonics = rolling.ef_harmonics;
        if let Some(c) = rolling.clamp_nonnegative {
            cfg.clamp_non_negative = c;
        }
        for (name, omega) in raw.omega.unwrap_or_default() {
            let kind: ModelKind = name.parse().map_err(config_err)?;
            if !kind.is_trigonometric() {
                return Err(GreyError::Config(format!("{kind} takes no frequency")));
            }
            cfg.omegas.insert(kind, omega);
        }
        if let Some(c) = raw.calibration {
            cfg.grid = OmegaGrid::new(c.lo, c.hi, c.step).map_err(config_err)?;
        }
        let augment = raw.augment.unwrap_or_default();
        cfg.noise_sigma = augment.sigma.unwrap_or(cfg.noise_sigma);
        cfg.seed = augment.seed.unwrap_or(cfg.seed);
        if let Some(l) = raw.linear {
            cfg.linear = l;
        }
        if let Some(p) = raw.arima {
            cfg.arima = ArimaSpec::new(p).map_err(config_err)?;
        }
        if let Some(p) = raw.sarima {
            cfg.sarima = ArimaSpec::new(p).map_err(config_err)?;
        }
        if let Some(s) = raw.setar {
            cfg.setar = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.rolling(ModelSpec::grey(ModelKind::Gm11))
            .validate()
            .map_err(config_err)?;
        if let Some((kind, w)) = self.omegas.iter().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(GreyError::Config(format!("{kind}: omega must be positive, got {w}")));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(GreyError::Config(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        self.linear.validate().map_err(config_err)?;
        self.setar.validate().map_err(config_err)
    }

    /// Sets every trigonometric model to one frequency.
    pub fn set_all_omegas(&mut self, omega: f64) {
        for kind in ModelKind::ALL.into_iter().filter(|k| k.is_trigonometric()) {
            self.omegas.insert(kind, omega);
        }
    }

    pub fn set_psi_route(&mut self, route: PsiRoute) {
        self.arima = self.arima.clone().with_route(route);
        self.sarima = self.sarima.clone().with_route(route);
    }

    pub fn benchmark(&self, name: &str) -> Option<BenchmarkSpec> {
        match name.to_ascii_uppercase().as_str() {
            "LINEAR" => Some(BenchmarkSpec::Linear(self.linear.clone())),
            "ARIMA" => Some(BenchmarkSpec::Arima(self.arima.clone())),
            "SARIMA" => Some(BenchmarkSpec::Sarima(self.sarima.clone())),
            "SETAR" => Some(BenchmarkSpec::Setar(self.setar.clone())),
            _ => None,
        }
    }

    /// Resolves a model name, taking benchmark coefficients from this config.
    pub fn model(&self, name: &str) -> Result<ModelSpec> {
        match self.benchmark(name.trim()) {
            Some(b) => Ok(ModelSpec::Benchmark(b)),
            None => name.parse(),
        }
    }

    /// The twelve grey variants followed by the four configured benchmarks.
    pub fn all_models(&self) -> Vec<ModelSpec> {
        let mut models = ModelSpec::all_grey();
        models.extend(
            BenchmarkSpec::NAMES
                .iter()
                .filter_map(|n| self.benchmark(n))
                .map(ModelSpec::Benchmark),
        );
        models
    }

    pub fn rolling(&self, model: ModelSpec) -> RollingConfig {
        let omega = model.kind().and_then(|k| self.omegas.get(&k).copied());
        RollingConfig {
            window: self.window,
            model,
            omega,
            ef_mode: self.ef_mode,
            ef_harmonics: self.ef_harmonics,
            clamp_non_negative: self.clamp_non_negative,
        }
    }
}
