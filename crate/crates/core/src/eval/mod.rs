//! Data plumbing and model comparison: CSV ingestion, aggregation, noise
//! augmentation, synthetic generators, accuracy metrics and reports.

pub mod compare;
pub mod config;
pub mod data;
pub mod metrics;
pub mod report;
pub mod synth;

pub use compare::{compare, Cell, CellStats, EvalReport, ImprovementRow, ModelRow};
pub use config::{Config, DEFAULT_CONFIG_TOML};
pub use data::{aggregate, augment_stuck_values, ingest_csv, Dataset, IngestOptions, Parameter};
pub use metrics::{improvement, mape, rmse, Mape};
pub use report::{render_csv, render_table, render_trace_csv};
pub use synth::{generate_synthetic, SynthSpec};
