use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{GreyError, Result};
use crate::series::Series;

/// Traffic quantity a dataset measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Parameter {
    #[default]
    Speed,
    TravelTime,
    Volume,
    Occupancy,
}

impl Parameter {
    /// Column code used in report headers.
    pub fn code(self) -> &'static str {
        match self {
            Parameter::Speed => "S",
            Parameter::TravelTime => "TT",
            Parameter::Volume => "V",
            Parameter::Occupancy => "O",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parameter::Speed => "speed",
            Parameter::TravelTime => "travel-time",
            Parameter::Volume => "volume",
            Parameter::Occupancy => "occupancy",
        })
    }
}

impl FromStr for Parameter {
    type Err = GreyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', ' '], "-").as_str() {
            "speed" | "s" => Ok(Parameter::Speed),
            "travel-time" | "traveltime" | "tt" => Ok(Parameter::TravelTime),
            "volume" | "v" => Ok(Parameter::Volume),
            "occupancy" | "o" => Ok(Parameter::Occupancy),
            _ => Err(GreyError::invalid(format!("unknown traffic parameter `{s}`"))),
        }
    }
}

/// A set of series sharing one sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    series: Vec<Series>,
    source: String,
    parameter: Parameter,
}

impl Dataset {
    pub fn new(series: Vec<Series>, source: impl Into<String>, parameter: Parameter) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| GreyError::invalid("a dataset needs at least one series"))?;
        if let Some(s) = series.iter().find(|s| s.interval() != first.interval()) {
            return Err(GreyError::invalid(format!(
                "series `{}` has interval {:?}, expected {:?}",
                s.label(),
                s.interval(),
                first.interval()
            )));
        }
        Ok(Self {
            series,
            source: source.into(),
            parameter,
        })
    }

    pub fn series(&self) -> &[Series] {
        &self.series
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn parameter(&self) -> Parameter {
        self.parameter
    }

    pub fn map_series(self, f: impl Fn(&Series) -> Result<Series>) -> Result<Self> {
        let series = self.series.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(series, self.source, self.parameter)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngestOptions {
    /// Sampling interval; inferred from ISO timestamps when absent, else one minute.
    pub interval: Option<Duration>,
    pub parameter: Parameter,
    /// For integer timestamps: observations per day used to split the file.
    pub per_day: Option<usize>,
}

enum Stamp {
    Index(i64),
    Time(NaiveDateTime),
}

fn parse_stamp(raw: &str) -> Option<Stamp> {
    if let Ok(i) = raw.parse::<i64>() {
        return Some(Stamp::Index(i));
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Some(Stamp::Time(t.naive_utc()));
    }
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
        .map(Stamp::Time)
}

struct Group {
    values: Vec<f64>,
    first_two: Vec<NaiveDateTime>,
}

/// Reads `timestamp,value[,location]` rows (one header line) into one series
/// per (day, location). Integer timestamps form a single day unless
/// `per_day` is set.
pub fn ingest_csv(path: &Path, options: &IngestOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(GreyError::invalid(format!("{} is empty", path.display())));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut groups: BTreeMap<(String, NaiveDate, u64), Group> = BTreeMap::new();
    let mut negatives = Vec::new();
    let mut rows = 0usize;
    let mut iso_seen = false;
    for record in reader.records() {
        let record = record.map_err(|e| GreyError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() < 2 || record.len() > 3 {
            return Err(GreyError::Parse {
                line,
                message: format!("expected `timestamp,value[,location]`, got {} fields", record.len()),
            });
        }
        let stamp = parse_stamp(&record[0]).ok_or_else(|| GreyError::Parse {
            line,
            message: format!("unreadable timestamp `{}`", &record[0]),
        })?;
        let value: f64 = record[1].parse().map_err(|_| GreyError::Parse {
            line,
            message: format!("value `{}` is not a number", &record[1]),
        })?;
        if !value.is_finite() {
            return Err(GreyError::Parse {
                line,
                message: format!("value `{}` is not finite", &record[1]),
            });
        }
        if value < 0.0 {
            negatives.push(line);
        }
        let location = record.get(2).unwrap_or("").to_string();
        let (day, slot, time) = match stamp {
            Stamp::Time(t) => {
                iso_seen = true;
                (t.date(), 0, Some(t))
            }
            Stamp::Index(i) => {
                let slot = options.per_day.map_or(0, |d| i.max(0) as u64 / d.max(1) as u64);
                (NaiveDate::MIN, slot, None)
            }
        };
        let group = groups.entry((location, day, slot)).or_insert(Group {
            values: Vec::new(),
            first_two: Vec::new(),
        });
        group.values.push(value);
        if let Some(t) = time {
            if group.first_two.len() < 2 {
                group.first_two.push(t);
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(GreyError::invalid(format!("{} has no data rows", path.display())));
    }
    if let Some(&first) = negatives.first() {
        let lines: Vec<String> = negatives.iter().map(u64::to_string).collect();
        return Err(GreyError::Parse {
            line: first,
            message: format!("negative values at lines {}", lines.join(", ")),
        });
    }

    let inferred = groups.values().find_map(|g| match g.first_two.as_slice() {
        [a, b] => (*b - *a).to_std().ok().filter(|d| !d.is_zero()),
        _ => None,
    });
    let interval = options
        .interval
        .or(if iso_seen { inferred } else { None })
        .unwrap_or(Series::DEFAULT_INTERVAL);

    let stem = path
        .file_stem()
        .map_or_else(|| "series".to_string(), |s| s.to_string_lossy().into_owned());
    let series = groups
        .into_iter()
        .map(|((location, day, slot), g)| {
            let mut label = stem.clone();
            if !location.is_empty() {
                label = format!("{label}/{location}");
            }
            if day != NaiveDate::MIN {
                label = format!("{label}/{day}");
            } else if options.per_day.is_some() {
                label = format!("{label}/day{slot}");
            }
            Series::new(g.values, interval, label)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(series, path.display().to_string(), options.parameter)
}

/// Non-overlapping block means at `target` spacing; a trailing partial block is dropped.
pub fn aggregate(series: &Series, target: Duration) -> Result<Series> {
    let base = series.interval().as_nanos();
    let t = target.as_nanos();
    if t == 0 || t % base != 0 {
        return Err(GreyError::invalid(format!(
            "target interval {target:?} is not a multiple of {:?}",
            series.interval()
        )));
    }
    let block = (t / base) as usize;
    let values: Vec<f64> = series
        .values()
        .chunks_exact(block)
        .map(|c| c.iter().sum::<f64>() / block as f64)
        .collect();
    if values.is_empty() {
        return Err(GreyError::InsufficientData {
            needed: block,
            got: series.len(),
        });
    }
    Series::new(values, target, series.label())
}

/// Shortest run of identical consecutive values treated as a stuck sensor.
pub const STUCK_RUN: usize = 3;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;

/// Adds independent `N(0, sigma^2)` noise to every element of each maximal run
/// of at least three identical values, clipping at 0. Other values are untouched.
pub fn augment_stuck_values(series: &Series, sigma: f64, seed: u64) -> Result<Series> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(GreyError::invalid(format!("noise sigma must be non-negative, got {sigma}")));
    }
    let x = series.values();
    let mut out = x.to_vec();
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).map_err(|e| GreyError::invalid(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut start = 0;
        while start < x.len() {
            let mut end = start + 1;
            while end < x.len() && x[end] == x[start] {
                end += 1;
            }
            if end - start >= STUCK_RUN {
                for v in &mut out[start..end] {
                    *v = (*v + normal.sample(&mut rng)).max(0.0);
                }
            }
            start = end;
        }
    }
    Series::new(out, series.interval(), series.label())
}
