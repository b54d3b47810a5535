use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use greycast_core::benchmarks::PsiRoute;
use greycast_core::correction::EfResidualMode;
use greycast_core::eval::{
    aggregate, augment_stuck_values, compare, ingest_csv, render_csv, render_table, render_trace_csv, Config,
    Dataset, IngestOptions, Parameter, SynthSpec,
};
use greycast_core::grey::ModelKind;
use greycast_core::rolling::{calibrate_omega, forecast_next, omega_scores, roll_forecast, ModelSpec, OmegaGrid};
use greycast_core::{GreyError, Result};

#[derive(Parser)]
#[command(name = "greycast", version, about = "Online grey-model traffic forecasting")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Rolling window length.
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Angular frequency for trigonometric models.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Seed for noise augmentation and synthetic generators.
    #[arg(long, global = true, env = "GREYCAST_SEED")]
    seed: Option<u64>,
    /// Residuals used by EF models: an integer >= 3 or `in-window`.
    #[arg(long, global = true)]
    ef_residual_window: Option<EfResidualMode>,
    /// Fourier harmonic count for EF models.
    #[arg(long, global = true)]
    ef_harmonics: Option<usize>,
    /// Use the power-series ARIMA weights instead of the closed-form recursions.
    #[arg(long, global = true)]
    standard_psi: bool,
    /// Clamp negative forecasts to zero.
    #[arg(long, global = true)]
    clamp_nonnegative: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Include wall-clock timing in reports.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Args)]
struct Source {
    /// CSV file with `timestamp,value[,location]` rows.
    #[arg(long, conflicts_with = "synth")]
    input: Option<PathBuf>,
    /// Generator spec, e.g. `seasonal:mean=20,amp=5,period=12,n=500`. Repeatable.
    #[arg(long)]
    synth: Vec<String>,
    /// Sampling interval of the input in seconds.
    #[arg(long)]
    interval_secs: Option<u64>,
    /// Observations per day for integer-indexed input.
    #[arg(long)]
    per_day: Option<usize>,
    /// Average into blocks of this many seconds.
    #[arg(long)]
    aggregate_secs: Option<u64>,
    /// Add low noise to runs of repeated values.
    #[arg(long)]
    augment: bool,
    #[arg(long, default_value = "speed")]
    parameter: Parameter,
}

#[derive(Subcommand)]
enum Command {
    /// Roll one model over one series.
    Forecast {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        model: String,
        /// Which series of the dataset to use.
        #[arg(long, default_value_t = 0)]
        series: usize,
        /// Also forecast this many steps past the last observation.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Grid-search the angular frequency of a trigonometric model.
    Calibrate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        series: usize,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Print the score of every grid point.
        #[arg(long)]
        scores: bool,
    },
    /// Evaluate one model over every series of a dataset.
    Evaluate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        model: String,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare models over a dataset.
    Compare {
        #[command(flatten)]
        source: Source,
        /// Comma-separated model names; defaults to all sixteen.
        #[arg(long)]
        models: Option<String>,
        /// Write per-step forecasts as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic series as CSV.
    Synth {
        spec: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn exit_code(e: &GreyError) -> u8 {
    match e {
        GreyError::CalibrationFailed(_) => 3,
        GreyError::Io(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn config(g: &Global) -> Result<Config> {
    let mut cfg = match &g.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(w) = g.window {
        cfg.window = w;
    }
    if let Some(w) = g.omega {
        cfg.set_all_omegas(w);
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(m) = g.ef_residual_window {
        cfg.ef_mode = m;
    }
    if g.ef_harmonics.is_some() {
        cfg.ef_harmonics = g.ef_harmonics;
    }
    if g.standard_psi {
        cfg.set_psi_route(PsiRoute::Standard);
    }
    if g.clamp_nonnegative {
        cfg.clamp_non_negative = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn synth_spec(raw: &str, seed: Option<u64>) -> Result<SynthSpec> {
    let spec: SynthSpec = raw.parse()?;
    Ok(match seed {
        Some(s) if !raw.contains("seed=") => spec.with_seed(s),
        _ => spec,
    })
}

fn load(source: &Source, cfg: &Config, seed: Option<u64>) -> Result<Dataset> {
    let mut dataset = match (&source.input, source.synth.as_slice()) {
        (Some(path), _) => ingest_csv(
            path,
            &IngestOptions {
                interval: source.interval_secs.map(Duration::from_secs),
                parameter: source.parameter,
                per_day: source.per_day,
            },
        )?,
        (None, []) => return Err(GreyError::InvalidInput("give --input or --synth".into())),
        (None, specs) => {
            let series = specs
                .iter()
                .map(|s| synth_spec(s, seed)?.generate())
                .collect::<Result<Vec<_>>>()?;
            Dataset::new(series, specs.join(" "), source.parameter)?
        }
    };
    if let Some(secs) = source.aggregate_secs {
        dataset = dataset.map_series(|s| aggregate(s, Duration::from_secs(secs)))?;
    }
    if source.augment {
        dataset = dataset.map_series(|s| augment_stuck_values(s, cfg.noise_sigma, cfg.seed))?;
    }
    Ok(dataset)
}

fn pick(dataset: &Dataset, index: usize) -> Result<&greycast_core::series::Series> {
    dataset.series().get(index).ok_or_else(|| {
        GreyError::InvalidInput(format!(
            "series index {index} out of range; the dataset has {}",
            dataset.series().len()
        ))
    })
}

/// Splits on commas outside parentheses so `GM(1,1)` stays whole.
fn split_models(list: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in list.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(list[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(list[start..].trim());
    parts.into_iter().filter(|p| !p.is_empty()).collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn run(cli: Cli) -> Result<String> {
    let g = &cli.global;
    let cfg = config(g)?;
    let seed = g.seed;
    let mut out = String::new();
    match cli.command {
        Command::Forecast { source, model, series, horizon } => {
            let dataset = load(&source, &cfg, seed)?;
            let s = pick(&dataset, series)?;
            let rolling = cfg.rolling(cfg.model(&model)?);
            let trace = roll_forecast(s, &rolling)?;
            match g.format {
                Format::Csv => {
                    let _ = writeln!(out, "index,observed,predicted,residual,fallback_flag");
                    for p in &trace.predictions {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{}",
                            p.index,
                            p.observed,
                            p.predicted,
                            p.residual(),
                            u8::from(p.fallback)
                        );
                    }
                }
                Format::Table => {
                    let _ = writeln!(out, "{:>6}  {:>12}  {:>12}  {:>12}", "index", "observed", "predicted", "residual");
                    for p in &trace.predictions {
                        let flag = if p.fallback { "  fallback" } else { "" };
                        let _ = writeln!(
                            out,
                            "{:>6}  {:>12.4}  {:>12.4}  {:>12.4}{flag}",
                            p.index,
                            p.observed,
                            p.predicted,
                            p.residual()
                        );
                    }
                    let _ = writeln!(out, "{} RMSE {:.6}, {} fallback steps", trace.model, trace.rmse(), trace.fallback_count());
                }
            }
            if let Some(h) = horizon {
                let ahead = forecast_next(s, &rolling, h)?;
                for (j, v) in ahead.iter().enumerate() {
                    let index = s.len() + j + 1;
                    match g.format {
                        Format::Csv => {
                            let _ = writeln!(out, "{index},,{v},,0");
                        }
                        Format::Table => {
                            let _ = writeln!(out, "{index:>6}  {:>12}  {v:>12.4}", "");
                        }
                    }
                }
            }
        }
        Command::Calibrate { source, model, series, lo, hi, step, scores } => {
            let dataset = load(&source, &cfg, seed)?;
            let s = pick(&dataset, series)?;
            let spec = cfg.model(&model)?;
            let kind: ModelKind = spec
                .kind()
                .filter(|k| k.is_trigonometric())
                .ok_or_else(|| GreyError::InvalidInput(format!("{model} has no frequency to calibrate")))?;
            let grid = OmegaGrid::new(
                lo.unwrap_or(cfg.grid.lo()),
                hi.unwrap_or(cfg.grid.hi()),
                step.unwrap_or(cfg.grid.step()),
            )?;
            let rolling = cfg.rolling(spec);
            if scores {
                let _ = writeln!(out, "omega,rmse");
                for (w, r) in omega_scores(s, kind, &grid, &rolling)? {
                    let _ = writeln!(out, "{w},{}", r.map_or(String::new(), |v| v.to_string()));
                }
            }
            let best = calibrate_omega(s, kind, &grid, &rolling)?;
            match g.format {
                Format::Csv => {
                    let _ = writeln!(out, "model,omega\n{},{best}", rolling.model);
                }
                Format::Table => {
                    let _ = writeln!(out, "{} omega = {best}", rolling.model);
                }
            }
        }
        Command::Evaluate { source, model, trace } => {
            let dataset = load(&source, &cfg, seed)?;
            let report = compare(&dataset, &[cfg.model(&model)?], &cfg);
            if let Some(path) = trace {
                write_file(&path, &render_trace_csv(&report))?;
            }
            out = render(&report, g);
        }
        Command::Compare { source, models, trace, output } => {
            let dataset = load(&source, &cfg, seed)?;
            let models = match models {
                None => cfg.all_models(),
                Some(list) => split_models(&list)
                    .into_iter()
                    .map(|m| cfg.model(m))
                    .collect::<Result<Vec<ModelSpec>>>()?,
            };
            let report = compare(&dataset, &models, &cfg);
            if let Some(path) = trace {
                write_file(&path, &render_trace_csv(&report))?;
            }
            let text = render(&report, g);
            match output {
                Some(path) => write_file(&path, &text)?,
                None => out = text,
            }
        }
        Command::Synth { spec, output } => {
            let series = synth_spec(&spec, seed)?.generate()?;
            let mut text = String::from("timestamp,value\n");
            for (i, v) in series.values().iter().enumerate() {
                let _ = writeln!(text, "{i},{v}");
            }
            match output {
                Some(path) => write_file(&path, &text)?,
                None => out = text,
            }
        }
    }
    Ok(out)
}

fn render(report: &greycast_core::eval::EvalReport, g: &Global) -> String {
    match g.format {
        Format::Table => render_table(report, g.timing),
        Format::Csv => render_csv(report, g.timing),
    }
}
