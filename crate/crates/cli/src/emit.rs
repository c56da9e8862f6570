//! Report serialization.
//!
//! `csv` is one line per report row (long format for simulation statistics),
//! `json` is the full report including metadata, and `plot` is a CSV of
//! x/y columns per method meant for external plotting.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::report::{Command, PfeReport, Report, ReportRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Plot,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv | Format::Plot => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "plot" | "plot-series" => Ok(Format::Plot),
            _ => Err(format!("unknown format '{s}' (expected csv, json or plot)")),
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn join_orders(o: &[usize]) -> String {
    o.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn key_header(series: Option<&str>, variable: &str) -> Vec<String> {
    series.into_iter().chain([variable]).map(str::to_string).collect()
}

fn key_cells(row_series: &Option<crate::config::SweepValue>, value: &crate::config::SweepValue, with_series: bool) -> Vec<String> {
    let mut v = Vec::new();
    if with_series {
        v.push(row_series.as_ref().map(|s| s.to_string()).unwrap_or_default());
    }
    v.push(value.to_string());
    v
}

fn method_names(rows: &[ReportRow]) -> Vec<String> {
    rows.first()
        .map(|r| r.methods.iter().map(|m| m.method.clone()).collect())
        .unwrap_or_default()
}

fn line(out: &mut String, cells: &[String]) {
    let _ = writeln!(out, "{}", cells.join(","));
}

/// Renders a report in the requested format.
pub fn render(report: &Report, format: Format) -> String {
    if format == Format::Json {
        return serde_json::to_string_pretty(report).expect("reports contain only finite-or-absent numbers") + "\n";
    }
    let series = report.series_variable.map(|v| v.as_str());
    let with_series = series.is_some();
    let key = key_header(series, report.variable.as_str());
    let names = method_names(&report.rows);
    let mut out = String::new();
    match (report.metadata.command, format) {
        (Command::Simulate, Format::Csv) => {
            let mut h = key.clone();
            h.extend(
                [
                    "method",
                    "orders",
                    "legs",
                    "time",
                    "n",
                    "p95",
                    "p05",
                    "rmse",
                    "mean",
                    "mae",
                    "min",
                    "max",
                    "skewness",
                    "kurtosis",
                    "degenerate",
                ]
                .map(String::from),
            );
            line(&mut out, &h);
            for r in &report.rows {
                for m in &r.methods {
                    for c in &m.checkpoints {
                        let s = &c.stats;
                        let mut cells = key_cells(&r.series, &r.value, with_series);
                        cells.extend([
                            m.method.clone(),
                            join_orders(&m.orders),
                            m.legs.to_string(),
                            c.time.to_string(),
                            s.n.to_string(),
                        ]);
                        cells.extend([s.p95, s.p05, s.rmse, s.mean, s.mae, s.min, s.max, s.skewness, s.kurtosis].map(|x| x.to_string()));
                        cells.push(s.degenerate.to_string());
                        line(&mut out, &cells);
                    }
                }
            }
        }
        (Command::Simulate, _) => {
            let mut h = key.clone();
            h.push("time".into());
            for n in &names {
                h.extend([format!("{n}_rmse"), format!("{n}_p95"), format!("{n}_p05")]);
            }
            line(&mut out, &h);
            for r in &report.rows {
                let times: Vec<f64> = r
                    .methods
                    .first()
                    .map(|m| m.checkpoints.iter().map(|c| c.time).collect())
                    .unwrap_or_default();
                for (i, t) in times.iter().enumerate() {
                    let mut cells = key_cells(&r.series, &r.value, with_series);
                    cells.push(t.to_string());
                    for m in &r.methods {
                        let s = &m.checkpoints[i].stats;
                        cells.extend([s.rmse, s.p95, s.p05].map(|x| x.to_string()));
                    }
                    line(&mut out, &cells);
                }
            }
        }
        (Command::Price, _) => {
            let mut h = key.clone();
            h.extend(["target_value", "target_delta"].map(String::from));
            line(&mut out, &h);
            for r in &report.rows {
                let mut cells = key_cells(&r.series, &r.value, with_series);
                cells.extend([r.target_value.to_string(), r.target_delta.to_string()]);
                line(&mut out, &cells);
            }
        }
        (_, Format::Csv) => {
            let mut h = key.clone();
            h.push("target_value".into());
            for n in &names {
                h.extend([format!("{n}_orders"), format!("{n}_legs"), format!("{n}_edl")]);
            }
            let has_pdl = names.iter().any(|n| n == "GQ1") && names.iter().any(|n| n == "GQ2");
            if has_pdl {
                h.push("pdl_percent".into());
            }
            line(&mut out, &h);
            for r in &report.rows {
                let mut cells = key_cells(&r.series, &r.value, with_series);
                cells.push(r.target_value.to_string());
                for m in &r.methods {
                    cells.extend([join_orders(&m.orders), m.legs.to_string(), opt(m.edl)]);
                }
                if has_pdl {
                    cells.push(opt(r.pdl));
                }
                line(&mut out, &cells);
            }
        }
        (_, _) => {
            let mut h = key.clone();
            for n in &names {
                h.extend([format!("{n}_edl"), format!("{n}_log10_abs_edl"), format!("{n}_percent_of_target")]);
            }
            line(&mut out, &h);
            for r in &report.rows {
                let mut cells = key_cells(&r.series, &r.value, with_series);
                for m in &r.methods {
                    let e = m.edl;
                    cells.extend([
                        opt(e),
                        opt(e.filter(|&x| x != 0.0).map(|x| x.abs().log10())),
                        opt(e.map(|x| 100.0 * x / r.target_value)),
                    ]);
                }
                line(&mut out, &cells);
            }
        }
    }
    out
}

/// Renders PFE curves; `csv` and `plot` share the same wide layout.
pub fn render_pfe(report: &PfeReport, format: Format) -> String {
    if format == Format::Json {
        return serde_json::to_string_pretty(report).expect("reports contain only finite numbers") + "\n";
    }
    let series = report.series_variable.map(|v| v.as_str());
    let with_series = series.is_some();
    let mut h = key_header(series, report.variable.as_str());
    h.push("time".into());
    if let Some(first) = report.rows.first() {
        for m in &first.methods {
            for l in &first.levels {
                h.push(format!("{}_p{l}", m.method));
            }
        }
    }
    let mut out = String::new();
    line(&mut out, &h);
    for r in &report.rows {
        for (i, t) in r.times.iter().enumerate() {
            let mut cells = key_cells(&r.series, &r.value, with_series);
            cells.push(t.to_string());
            for m in &r.methods {
                cells.extend(m.curves.iter().map(|c| c[i].to_string()));
            }
            line(&mut out, &cells);
        }
    }
    out
}

pub fn parse_json(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}

/// Writes `text` to `dir/name`, or to stdout when `dir` is `None`.
pub fn write_output(dir: Option<&std::path::Path>, name: &str, text: &str) -> io::Result<()> {
    match dir {
        None => io::stdout().lock().write_all(text.as_bytes()),
        Some(d) => {
            std::fs::create_dir_all(d)?;
            std::fs::write(d.join(name), text)
        }
    }
}
