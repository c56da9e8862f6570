use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{ErrorMatrix, HedgeErrorStats};
use crate::scalar::Real;

/// Error statistics for one hedging method at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct StatsRecord<T> {
    pub method: String,
    pub time: T,
    pub stats: HedgeErrorStats<T>,
}

/// One row per path: `path,<t_0>,<t_1>,...`.
pub fn write_error_csv<T: Real, W: Write>(m: &ErrorMatrix<T>, mut out: W) -> io::Result<()> {
    write!(out, "path")?;
    for t in m.times() {
        write!(out, ",{t}")?;
    }
    writeln!(out)?;
    for p in 0..m.n_paths() {
        write!(out, "{p}")?;
        for v in m.row(p) {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// One row per (method, time).
pub fn write_stats_csv<T: Real, W: Write>(records: &[StatsRecord<T>], mut out: W) -> io::Result<()> {
    writeln!(out, "method,time,n,p95,p05,rmse,mean,mae,min,max,skewness,kurtosis,degenerate")?;
    for r in records {
        let s = &r.stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method, r.time, s.n, s.p95, s.p05, s.rmse, s.mean, s.mae, s.min, s.max, s.skewness, s.kurtosis, s.degenerate
        )?;
    }
    Ok(())
}

/// JSON array of [`StatsRecord`]s.
pub fn stats_json<T: Real + Serialize>(records: &[StatsRecord<T>]) -> String {
    serde_json::to_string_pretty(records).expect("stats records serialize")
}
