use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{GreyError, Result};
use crate::series::Series;

/// A synthetic series generator. Positions are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthSpec {
    /// Exact GM(1,1) basic-form sequence: `x(k) = (b - a x1(k-1)) / (1 + a/2)`.
    Exponential { a: f64, b: f64, x1: f64, n: usize },
    /// `cap / (1 + (cap/x0 - 1) e^{-rate k})` plus noise.
    Logistic {
        cap: f64,
        rate: f64,
        x0: f64,
        n: usize,
        sigma: f64,
        seed: u64,
    },
    /// `mean + amp sin(2 pi k / period)` plus noise.
    Seasonal {
        mean: f64,
        amp: f64,
        period: f64,
        n: usize,
        sigma: f64,
        seed: u64,
    },
    /// Level `base`, dropping by `drop` from position `start` and returning from
    /// `recover`, each transition spread linearly over `ramp` steps.
    Incident {
        base: f64,
        drop: f64,
        start: usize,
        recover: usize,
        ramp: usize,
        n: usize,
        sigma: f64,
        seed: u64,
    },
}

impl SynthSpec {
    pub fn seasonal(seed: u64) -> Self {
        SynthSpec::Seasonal {
            mean: 20.0,
            amp: 5.0,
            period: 12.0,
            n: 500,
            sigma: 0.5,
            seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SynthSpec::Exponential { .. } => "exponential",
            SynthSpec::Logistic { .. } => "logistic",
            SynthSpec::Seasonal { .. } => "seasonal",
            SynthSpec::Incident { .. } => "incident",
        }
    }

    /// Replaces the seed of noisy generators.
    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            SynthSpec::Logistic { cap, rate, x0, n, sigma, .. } => SynthSpec::Logistic {
                cap,
                rate,
                x0,
                n,
                sigma,
                seed: new_seed,
            },
            SynthSpec::Seasonal { mean, amp, period, n, sigma, .. } => SynthSpec::Seasonal {
                mean,
                amp,
                period,
                n,
                sigma,
                seed: new_seed,
            },
            SynthSpec::Incident { base, drop, start, recover, ramp, n, sigma, .. } => {
                SynthSpec::Incident {
                    base,
                    drop,
                    start,
                    recover,
                    ramp,
                    n,
                    sigma,
                    seed: new_seed,
                }
            }
            other => other,
        }
    }

    fn validate(&self) -> Result<()> {
        let (n, sigma) = match *self {
            SynthSpec::Exponential { a, n, .. } => {
                if a == -2.0 {
                    return Err(GreyError::invalid("exponential generator needs a != -2"));
                }
                (n, 0.0)
            }
            SynthSpec::Logistic { cap, x0, n, sigma, .. } => {
                if !(x0 > 0.0 && cap > 0.0) {
                    return Err(GreyError::invalid("logistic generator needs cap > 0 and x0 > 0"));
                }
                (n, sigma)
            }
            SynthSpec::Seasonal { period, n, sigma, .. } => {
                if !(period > 0.0) {
                    return Err(GreyError::invalid("seasonal period must be positive"));
                }
                (n, sigma)
            }
            SynthSpec::Incident { start, recover, n, sigma, .. } => {
                if recover < start {
                    return Err(GreyError::invalid("incident must recover after it starts"));
                }
                (n, sigma)
            }
        };
        if n == 0 {
            return Err(GreyError::invalid("generator length n must be positive"));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(GreyError::invalid(format!("noise sigma must be non-negative, got {sigma}")));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Series> {
        self.validate()?;
        let values = match *self {
            SynthSpec::Exponential { a, b, x1, n } => {
                let mut out = Vec::with_capacity(n);
                let mut acc = 0.0;
                for k in 0..n {
                    let v = if k == 0 { x1 } else { (b - a * acc) / (1.0 + a / 2.0) };
                    acc += v;
                    out.push(v);
                }
                out
            }
            SynthSpec::Logistic { cap, rate, x0, n, sigma, seed } => with_noise(n, sigma, seed, |k| {
                cap / (1.0 + (cap / x0 - 1.0) * (-rate * k as f64).exp())
            })?,
            SynthSpec::Seasonal { mean, amp, period, n, sigma, seed } => {
                with_noise(n, sigma, seed, |k| mean + amp * (2.0 * PI * k as f64 / period).sin())?
            }
            SynthSpec::Incident { base, drop, start, recover, ramp, n, sigma, seed } => {
                let depth = |since: usize| {
                    if ramp == 0 {
                        1.0
                    } else {
                        ((since + 1) as f64 / ramp as f64).min(1.0)
                    }
                };
                with_noise(n, sigma, seed, |k| {
                    if k < start {
                        base
                    } else if k < recover {
                        base - drop * depth(k - start)
                    } else {
                        let low = depth(recover - start);
                        base - drop * low * (1.0 - depth(k - recover))
                    }
                })?
            }
        };
        Series::from_values(values).map(|s| s.with_label(self.to_string()))
    }
}

fn with_noise(n: usize, sigma: f64, seed: u64, f: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = (0..n).map(f).collect();
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).map_err(|e| GreyError::invalid(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(values)
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthSpec::Exponential { a, b, x1, n } => {
                write!(f, "exponential:a={a},b={b},x1={x1},n={n}")
            }
            SynthSpec::Logistic { cap, rate, x0, n, sigma, seed } => write!(
                f,
                "logistic:cap={cap},rate={rate},x0={x0},n={n},sigma={sigma},seed={seed}"
            ),
            SynthSpec::Seasonal { mean, amp, period, n, sigma, seed } => write!(
                f,
                "seasonal:mean={mean},amp={amp},period={period},n={n},sigma={sigma},seed={seed}"
            ),
            SynthSpec::Incident { base, drop, start, recover, ramp, n, sigma, seed } => write!(
                f,
                "incident:base={base},drop={drop},start={start},recover={recover},ramp={ramp},n={n},sigma={sigma},seed={seed}"
            ),
        }
    }
}

struct Params {
    name: String,
    values: BTreeMap<String, String>,
}

impl Params {
    fn parse(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut values = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| GreyError::invalid(format!("expected key=value, got `{pair}`")))?;
            values.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        Ok(Self {
            name: name.trim().to_ascii_lowercase(),
            values,
        })
    }

    fn take<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.values.remove(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                GreyError::invalid(format!("{}: bad value `{raw}` for `{key}`", self.name))
            }),
        }
    }

    fn finish(self, spec: SynthSpec) -> Result<SynthSpec> {
        if let Some(key) = self.values.keys().next() {
            return Err(GreyError::invalid(format!("{}: unknown parameter `{key}`", self.name)));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses `name:key=value,...`; omitted keys take defaults.
impl FromStr for SynthSpec {
    type Err = GreyError;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Params::parse(s)?;
        let spec = match p.name.as_str() {
            "exponential" => SynthSpec::Exponential {
                a: p.take("a", 0.1)?,
                b: p.take("b", 2.0)?,
                x1: p.take("x1", 1.0)?,
                n: p.take("n", 50)?,
            },
            "logistic" => SynthSpec::Logistic {
                cap: p.take("cap", 60.0)?,
                rate: p.take("rate", 0.05)?,
                x0: p.take("x0", 5.0)?,
                n: p.take("n", 200)?,
                sigma: p.take("sigma", 0.0)?,
                seed: p.take("seed", 0)?,
            },
            "seasonal" => SynthSpec::Seasonal {
                mean: p.take("mean", 20.0)?,
                amp: p.take("amp", 5.0)?,
                period: p.take("period", 12.0)?,
                n: p.take("n", 500)?,
                sigma: p.take("sigma", 0.5)?,
                seed: p.take("seed", 0)?,
            },
            "incident" => SynthSpec::Incident {
                base: p.take("base", 60.0)?,
                drop: p.take("drop", 35.0)?,
                start: p.take("start", 220)?,
                recover: p.take("recover", 230)?,
                ramp: p.take("ramp", 0)?,
                n: p.take("n", 288)?,
                sigma: p.take("sigma", 0.0)?,
                seed: p.take("seed", 0)?,
            },
            other => return Err(GreyError::invalid(format!("unknown generator `{other}`"))),
        };
        p.finish(spec)
    }
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<Series> {
    spec.generate()
}
