//! Monte-Carlo hedge-error paths for static and delta hedges.
//!
//! Paths are simulated under the real-world drift `mu`; all pricing and
//! deltas use the risk-neutral parameters. Every path draws from its own
//! ChaCha stream (diffusion on stream `2p`, jumps on `2p + 1`), so output is
//! bit-identical for any thread count and a jump model with `lambda = 0`
//! reproduces the Black-Scholes paths exactly.

mod export;
mod stats;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;
use thiserror::Error;

use crate::models::{self, ModelError, ModelSpec, OptionKind, OptionRef};
use crate::scalar::Real;
use crate::spanning::HedgePortfolio;

pub use export::{stats_json, write_error_csv, write_stats_csv, StatsRecord};
pub use stats::{pfe_curves, summarize, HedgeErrorStats, PfeCurves};

/// Relative tolerance for "horizon is a whole number of steps" and for
/// matching leg maturities to grid times.
pub const GRID_TOL: f64 = 1e-9;
/// Upper bound on jumps drawn in a single step.
pub const MAX_JUMPS_PER_STEP: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("simulation horizon {horizon} must be before the target maturity {maturity}")]
    HorizonPastMaturity { horizon: f64, maturity: f64 },
    #[error("simulation horizon {horizon} is past the last hedge maturity {last}")]
    HorizonPastLegs { horizon: f64, last: f64 },
    #[error("leg maturity {maturity} is not on the time grid")]
    LegOffGrid { maturity: f64 },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("portfolio spot {portfolio} differs from the simulated initial spot {paths}")]
    SpotMismatch { portfolio: f64, paths: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub n_paths: usize,
    pub seed: u64,
    /// Time step `h` in years.
    pub step: T,
    /// Final grid time; a whole number of steps.
    pub horizon: T,
    pub spot0: T,
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let fail = |m: String| Err(SimulationError::Config(m));
        if self.n_paths == 0 {
            return fail("n_paths must be at least 1".into());
        }
        if !(self.step.is_finite() && self.step > T::zero()) {
            return fail(format!("step must be positive, got {}", self.step));
        }
        if !(self.horizon.is_finite() && self.horizon > T::zero()) {
            return fail(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.spot0.is_finite() && self.spot0 > T::zero()) {
            return fail(format!("spot0 must be positive, got {}", self.spot0));
        }
        let ratio = (self.horizon / self.step).as_f64();
        if (ratio - ratio.round()).abs() > GRID_TOL * ratio.max(1.0) || ratio.round() < 1.0 {
            return fail(format!("horizon {} is not a whole number of steps of {}", self.horizon, self.step));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.step).as_f64().round() as usize
    }

    /// Grid `t_i = i h`, with the last point pinned to `horizon`.
    pub fn times(&self) -> Vec<T> {
        let n = self.n_steps();
        (0..=n)
            .map(|i| if i == n { self.horizon } else { T::from_usize_lossy(i) * self.step })
            .collect()
    }
}

/// Simulated spot paths, one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet<T> {
    times: Vec<T>,
    values: Vec<T>,
    n_paths: usize,
}

impl<T: Real> PathSet<T> {
    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn path(&self, p: usize) -> &[T] {
        let w = self.times.len();
        &self.values[p * w..(p + 1) * w]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.values.chunks(self.times.len())
    }

    pub fn spot0(&self) -> T {
        self.values[0]
    }
}

/// Discounted hedge errors, one row per path and one column per grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMatrix<T> {
    times: Vec<T>,
    values: Vec<T>,
    n_paths: usize,
}

impl<T: Real> ErrorMatrix<T> {
    fn from_rows(times: &[T], rows: Vec<Vec<T>>) -> Self {
        let n_paths = rows.len();
        Self {
            times: times.to_vec(),
            values: rows.into_iter().flatten().collect(),
            n_paths,
        }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn row(&self, p: usize) -> &[T] {
        let w = self.times.len();
        &self.values[p * w..(p + 1) * w]
    }

    /// Cross-path sample at grid index `i`.
    pub fn column(&self, i: usize) -> Vec<T> {
        let w = self.times.len();
        (0..self.n_paths).map(|p| self.values[p * w + i]).collect()
    }

    /// Cross-path sample at the last grid time.
    pub fn terminal(&self) -> Vec<T> {
        self.column(self.times.len() - 1)
    }

    /// Grid index of `t`, if `t` is on the grid.
    pub fn index_of(&self, t: T) -> Option<usize> {
        grid_index(&self.times, t)
    }
}

fn grid_index<T: Real>(times: &[T], t: T) -> Option<usize> {
    let tol = T::lit(GRID_TOL) * t.abs().max(T::one());
    times.iter().position(|&g| (g - t).abs() <= tol)
}

/// Uniform on the open interval (0, 1).
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * open_uniform(rng))
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u32 {
    let u = open_uniform(rng);
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0;
    while u > cdf && k < MAX_JUMPS_PER_STEP {
        k += 1;
        p *= mean / f64::from(k);
        cdf += p;
    }
    k
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Spot paths under the real-world measure, exact in distribution on the grid.
pub fn simulate_paths<T: Real>(model: &ModelSpec<T>, cfg: &SimConfig<T>) -> Result<PathSet<T>, SimulationError> {
    cfg.validate()?;
    model.validate()?;
    let times = cfg.times();
    let width = times.len();
    let half = T::lit(0.5);
    let (sigma, jumps) = match model {
        ModelSpec::Bs(p) => (p.sigma, None),
        ModelSpec::Mjd(p) => (p.sigma, Some((p.lambda, p.mu_j, p.sigma_j, p.jump_compensator()))),
    };
    let comp = jumps.map_or(T::zero(), |(lambda, _, _, g)| lambda * g);
    let drift_rate = model.real_world_drift() - model.dividend_yield() - comp - half * sigma * sigma;

    let mut values = vec![T::zero(); cfg.n_paths * width];
    values.par_chunks_mut(width).enumerate().for_each(|(p, row)| {
        let mut diffusion = stream(cfg.seed, 2 * p as u64);
        let mut jump_rng = stream(cfg.seed, 2 * p as u64 + 1);
        row[0] = cfg.spot0;
        let mut log_s = cfg.spot0.ln();
        for i in 1..width {
            let h = times[i] - times[i - 1];
            let z = T::lit(std_normal(&mut diffusion));
            let mut incr = drift_rate * h + sigma * h.sqrt() * z;
            if let Some((lambda, mu_j, sigma_j, _)) = jumps {
                let count = poisson(&mut jump_rng, (lambda * h).as_f64());
                for _ in 0..count {
                    incr = incr + mu_j + sigma_j * T::lit(std_normal(&mut jump_rng));
                }
            }
            log_s = log_s + incr;
            row[i] = log_s.exp();
        }
    });
    Ok(PathSet {
        times,
        values,
        n_paths: cfg.n_paths,
    })
}

fn option_delta<T: Real>(model: &ModelSpec<T>, target: &OptionRef<T>, spot: T, t: T) -> Result<T, ModelError> {
    let d = models::delta(model, spot, t, target.strike, target.maturity)?;
    Ok(match target.kind {
        OptionKind::Call => d,
        OptionKind::Put => d - (-model.dividend_yield() * (target.maturity - t)).exp(),
    })
}

/// Discrete delta hedge rebalanced at every grid time, financed at `r`.
pub fn delta_hedge_run<T: Real>(
    paths: &PathSet<T>,
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
) -> Result<ErrorMatrix<T>, SimulationError> {
    let times = paths.times();
    let horizon = *times.last().expect("grid has at least two points");
    if horizon >= target.maturity {
        return Err(SimulationError::HorizonPastMaturity {
            horizon: horizon.as_f64(),
            maturity: target.maturity.as_f64(),
        });
    }
    let r = model.rate();
    let rows = (0..paths.n_paths())
        .into_par_iter()
        .map(|p| {
            let s = paths.path(p);
            let mut v = target.price(model, s[0], times[0])?;
            let mut row = Vec::with_capacity(times.len());
            row.push((-r * times[0]).exp() * (v - target.price(model, s[0], times[0])?));
            for i in 1..times.len() {
                let d = option_delta(model, target, s[i - 1], times[i - 1])?;
                v = d * s[i] + (v - d * s[i - 1]) * (r * (times[i] - times[i - 1])).exp();
                let c = target.price(model, s[i], times[i])?;
                row.push((-r * times[i]).exp() * (v - c));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, SimulationError>>()?;
    Ok(ErrorMatrix::from_rows(times, rows))
}

/// Static hedge held to the grid horizon.
///
/// The hedge value is the live legs marked to model, plus `b0` and every
/// expired leg's payoff rolled forward at `r`. Leg maturities inside the
/// horizon must be grid times.
pub fn static_hedge_run<T: Real>(
    paths: &PathSet<T>,
    portfolio: &HedgePortfolio<T>,
    model: &ModelSpec<T>,
) -> Result<ErrorMatrix<T>, SimulationError> {
    let times = paths.times();
    let horizon = *times.last().expect("grid has at least two points");
    let eps = T::lit(GRID_TOL);
    if let Some(last) = portfolio.legs.iter().map(|l| l.maturity).reduce(T::max) {
        if horizon > last + eps {
            return Err(SimulationError::HorizonPastLegs {
                horizon: horizon.as_f64(),
                last: last.as_f64(),
            });
        }
    }
    if horizon >= portfolio.target.maturity {
        return Err(SimulationError::HorizonPastMaturity {
            horizon: horizon.as_f64(),
            maturity: portfolio.target.maturity.as_f64(),
        });
    }
    if (portfolio.spot - paths.spot0()).abs() > eps * portfolio.spot {
        return Err(SimulationError::SpotMismatch {
            portfolio: portfolio.spot.as_f64(),
            paths: paths.spot0().as_f64(),
        });
    }
    // Grid index at which each leg expires, if it does so within the horizon.
    let expiry: Vec<Option<usize>> = portfolio
        .legs
        .iter()
        .map(|leg| {
            if leg.maturity > horizon + eps {
                Ok(None)
            } else {
                grid_index(times, leg.maturity).map(Some).ok_or(SimulationError::LegOffGrid {
                    maturity: leg.maturity.as_f64(),
                })
            }
        })
        .collect::<Result<_, _>>()?;

    let r = model.rate();
    let rows = (0..paths.n_paths())
        .into_par_iter()
        .map(|p| {
            let s = paths.path(p);
            let mut row = Vec::with_capacity(times.len());
            for (i, &t) in times.iter().enumerate() {
                let mut h = T::zero();
                for (leg, exp_idx) in portfolio.legs.iter().zip(&expiry) {
                    match *exp_idx {
                        Some(m) if m <= i => {
                            let payoff = (s[m] - leg.strike).max(T::zero());
                            h = h + leg.weight * payoff * (r * (t - times[m])).exp();
                        }
                        _ => h = h + leg.weight * models::call_price(model, s[i], t, leg.strike, leg.maturity)?,
                    }
                }
                h = h + portfolio.b0 * (r * t).exp();
                let c = portfolio.target.price(model, s[i], t)?;
                row.push((-r * t).exp() * (h - c));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, SimulationError>>()?;
    Ok(ErrorMatrix::from_rows(times, rows))
}

#[cfg(test)]
mod tests;
