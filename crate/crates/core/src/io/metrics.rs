//! Comma-separated metric tables.
//!
//! Files start with `# key=value` comment lines describing the run, then a
//! header row and one row per epoch. Numbers use twelve fixed decimals and
//! `.` as decimal point; lines end with `\n`.

use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::evaluation::ReconReport;
use crate::training::{EpochMetrics, MetricsLog};

pub const METRICS_HEADER: &str = "epoch,mse_amp,mse_log,exact_ll";
pub const REPORT_HEADER: &str = "model,frames,mse_amp,mse_log,negative_bins";

fn comments(out: &mut String, meta: &[(String, String)]) {
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
}

pub fn format_metrics(log: &[EpochMetrics], meta: &[(String, String)]) -> Result<String> {
    if log.is_empty() {
        return Err(Error::Empty("metrics log has no epochs".into()));
    }
    let mut out = String::new();
    comments(&mut out, meta);
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for m in log {
        let ll = m.exact_ll.map(|x| format!("{x:.12}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:.12},{:.12},{ll}", m.epoch, m.mse_amp, m.mse_log);
    }
    Ok(out)
}

pub fn export_metrics(log: &[EpochMetrics], meta: &[(String, String)], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_metrics(log, meta)?.as_bytes())
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Metadata(format!("metrics line {line}: {msg}"))
}

/// Inverse of [`format_metrics`]; comment lines are skipped.
pub fn parse_metrics(text: &str) -> Result<MetricsLog> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h == METRICS_HEADER => {}
        Some((n, h)) => return Err(bad(n + 1, format!("expected header {METRICS_HEADER:?}, got {h:?}"))),
        None => return Err(Error::Empty("no header row".into())),
    }
    let mut log = Vec::new();
    for (n, line) in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad(n + 1, format!("{} columns", cols.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(n + 1, e));
        log.push(EpochMetrics {
            epoch: cols[0].parse().map_err(|e| bad(n + 1, e))?,
            mse_amp: num(cols[1])?,
            mse_log: num(cols[2])?,
            exact_ll: if cols[3].is_empty() { None } else { Some(num(cols[3])?) },
        });
    }
    Ok(log)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub report: ReconReport,
}

pub fn format_report(rows: &[ReportRow], meta: &[(String, String)]) -> String {
    let mut out = String::new();
    comments(&mut out, meta);
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.12},{:.12},{}",
            r.model, r.report.frames, r.report.mse_amp, r.report.mse_log, r.report.negative_bin_count
        );
    }
    out
}

pub fn export_report(rows: &[ReportRow], meta: &[(String, String)], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_report(rows, meta).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log() -> MetricsLog {
        vec![
            EpochMetrics {
                epoch: 1,
                mse_amp: 0.123456789012345,
                mse_log: 42.5,
                exact_ll: Some(-3.25),
            },
            EpochMetrics {
                epoch: 2,
                mse_amp: 1e-3,
                mse_log: 7.0,
                exact_ll: None,
            },
        ]
    }

    #[test]
    fn two_epochs_three_lines() {
        let text = format_metrics(&log(), &[]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "epoch,mse_amp,mse_log,exact_ll");
        assert_eq!(lines[1], "1,0.123456789012,42.500000000000,-3.250000000000");
        assert_eq!(lines[2], "2,0.001000000000,7.000000000000,");
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn parse_round_trip() {
        let meta = vec![("model".to_string(), "gamma".to_string())];
        let text = format_metrics(&log(), &meta).unwrap();
        assert!(text.starts_with("# model=gamma\n"));
        let back = parse_metrics(&text).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in log().iter().zip(&back) {
            assert_eq!(a.epoch, b.epoch);
            assert!((a.mse_amp - b.mse_amp).abs() <= 5e-13);
            assert!((a.mse_log - b.mse_log).abs() <= 5e-13);
            assert_eq!(a.exact_ll.is_some(), b.exact_ll.is_some());
        }
    }

    #[test]
    fn empty_log_rejected() {
        assert!(matches!(format_metrics(&[], &[]), Err(Error::Empty(_))));
    }
}
