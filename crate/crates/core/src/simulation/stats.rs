use serde::{Deserialize, Serialize};

use super::{ErrorMatrix, SimulationError};
use crate::scalar::Real;

/// Summary of one cross-path hedge-error sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HedgeErrorStats<T> {
    pub n: usize,
    pub p95: T,
    pub p05: T,
    pub rmse: T,
    pub mean: T,
    pub mae: T,
    pub min: T,
    pub max: T,
    pub skewness: T,
    /// Excess kurtosis (normal = 0).
    pub kurtosis: T,
    /// All samples equal; skewness and kurtosis are reported as 0.
    pub degenerate: bool,
}

/// Empirical percentile with linear interpolation between order statistics.
fn percentile<T: Real>(sorted: &[T], q: f64) -> T {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::lit(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn sorted<T: Real>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("hedge errors are finite"));
    v
}

pub fn summarize<T: Real>(errors: &[T]) -> Result<HedgeErrorStats<T>, SimulationError> {
    let n = errors.len();
    if n < 2 {
        return Err(SimulationError::TooFewSamples(n));
    }
    let nf = T::from_usize_lossy(n);
    let mean = errors.iter().copied().sum::<T>() / nf;
    let mut m2 = T::zero();
    let mut m3 = T::zero();
    let mut m4 = T::zero();
    let mut sq = T::zero();
    let mut abs = T::zero();
    for &x in errors {
        let d = x - mean;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
        sq = sq + x * x;
        abs = abs + x.abs();
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let s = sorted(errors);
    let degenerate = s[0] == s[n - 1];
    let (skewness, kurtosis) = if degenerate || m2 <= T::zero() {
        (T::zero(), T::zero())
    } else {
        (m3 / m2.powf(T::lit(1.5)), m4 / (m2 * m2) - T::lit(3.0))
    };
    Ok(HedgeErrorStats {
        n,
        p95: percentile(&s, 95.0),
        p05: percentile(&s, 5.0),
        rmse: (sq / nf).sqrt(),
        mean,
        mae: abs / nf,
        min: s[0],
        max: s[n - 1],
        skewness,
        kurtosis,
        degenerate,
    })
}

/// Percentile curves of the discounted error across paths, one per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfeCurves<T> {
    pub times: Vec<T>,
    /// Percentile levels in percent, e.g. `[95.0, 5.0]`.
    pub levels: Vec<f64>,
    /// `curves[k][i]` is the `levels[k]` percentile at `times[i]`.
    pub curves: Vec<Vec<T>>,
}

pub fn pfe_curves<T: Real>(errors: &ErrorMatrix<T>, levels: &[f64]) -> Result<PfeCurves<T>, SimulationError> {
    if errors.n_paths() < 2 {
        return Err(SimulationError::TooFewSamples(errors.n_paths()));
    }
    if let Some(bad) = levels.iter().find(|q| !(0.0..=100.0).contains(*q)) {
        return Err(SimulationError::Config(format!("percentile level {bad} outside [0, 100]")));
    }
    let columns: Vec<Vec<T>> = (0..errors.times().len()).map(|i| sorted(&errors.column(i))).collect();
    let curves = levels.iter().map(|&q| columns.iter().map(|c| percentile(c, q)).collect()).collect();
    Ok(PfeCurves {
        times: errors.times().to_vec(),
        levels: levels.to_vec(),
        curves,
    })
}
