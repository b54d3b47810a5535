use std::fmt::Write;
use std::time::Duration;

use crate::eval::compare::EvalReport;

pub const REPORT_CSV_HEADER: &str = "model,metric,value,series_count,excluded_pairs";
pub const TRACE_CSV_HEADER: &str = "series,model,index,observed,predicted,residual,fallback_flag";

/// Label of the improvement row.
pub const IMPROVEMENT_LABEL: &str = "% Imp";

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

fn csv_value(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Percentages shown in the improvement row are rounded to whole numbers.
pub fn display_percent(v: f64) -> i64 {
    v.round() as i64
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Aligned plain-text table. Timing columns appear only when `timing` is set,
/// so the default output is reproducible byte for byte.
pub fn render_table(report: &EvalReport, timing: bool) -> String {
    let mut header = vec!["Model", "RMSE", "MAPE(%)", "Series", "Excluded", "Fallbacks", "Failed"];
    if timing {
        header.extend(["CT(s)", "Step(ms)"]);
    }
    let mut rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                r.model.clone(),
                opt(r.rmse, 4),
                opt(r.mape, 2),
                r.series_count.to_string(),
                r.excluded_pairs.to_string(),
                r.fallback_steps.to_string(),
                r.failed_series.to_string(),
            ];
            if timing {
                cells.push(format!("{:.4}", secs(r.compute_time)));
                cells.push(format!("{:.4}", secs(r.mean_step_time) * 1e3));
            }
            cells
        })
        .collect();
    if let Some(imp) = &report.improvement {
        let mut cells = vec![
            IMPROVEMENT_LABEL.to_string(),
            imp.rmse.map_or("-".into(), |v| display_percent(v).to_string()),
            imp.mape.map_or("-".into(), |v| display_percent(v).to_string()),
        ];
        cells.resize(header.len(), String::new());
        rows.push(cells);
    }

    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        parts.join("  ").trim_end().to_string()
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} ({}) | {} series | {}",
        report.parameter,
        report.parameter.code(),
        report.series_count,
        report.source
    );
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", line(&header));
    let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    for r in &rows {
        let _ = writeln!(out, "{}", line(r));
    }
    if let Some(imp) = &report.improvement {
        let _ = writeln!(out, "{IMPROVEMENT_LABEL}: {} over {}", imp.candidate, imp.reference);
    }
    for (series, model, err) in report.failures() {
        let _ = writeln!(out, "failed: {series} / {model}: {err}");
    }
    out
}

/// Long-format metrics CSV.
pub fn render_csv(report: &EvalReport, timing: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{REPORT_CSV_HEADER}");
    for r in &report.rows {
        let model = quote(&r.model);
        let mut metrics = vec![
            ("rmse", csv_value(r.rmse)),
            ("mape", csv_value(r.mape)),
            ("fallback_steps", r.fallback_steps.to_string()),
            ("failed_series", r.failed_series.to_string()),
        ];
        if timing {
            metrics.push(("compute_time_s", secs(r.compute_time).to_string()));
            metrics.push(("mean_step_time_s", secs(r.mean_step_time).to_string()));
        }
        for (metric, value) in metrics {
            let _ = writeln!(out, "{model},{metric},{value},{},{}", r.series_count, r.excluded_pairs);
        }
    }
    if let Some(imp) = &report.improvement {
        let count = report
            .row(&imp.reference)
            .zip(report.row(&imp.candidate))
            .map_or(0, |(a, b)| a.series_count.min(b.series_count));
        for (metric, value) in [("rmse", imp.rmse), ("mape", imp.mape)] {
            let _ = writeln!(out, "{},{metric},{},{count},0", quote(IMPROVEMENT_LABEL), csv_value(value));
        }
    }
    out
}

/// One line per emitted forecast of every successful cell.
pub fn render_trace_csv(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TRACE_CSV_HEADER}");
    for cell in &report.cells {
        let Ok(stats) = &cell.outcome else { continue };
        let (series, model) = (quote(&cell.series), quote(&cell.model));
        for p in &stats.trace.predictions {
            let _ = writeln!(
                out,
                "{series},{model},{},{},{},{},{}",
                p.index,
                p.observed,
                p.predicted,
                p.residual(),
                u8::from(p.fallback)
            );
        }
    }
    out
}
