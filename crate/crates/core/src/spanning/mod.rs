//! Static hedge portfolios of shorter-dated calls.
//!
//! Two families of builders are provided:
//!
//! * Gauss-Hermite (`CW_a`, `CW_b`): a single short maturity, strikes placed
//!   at the Hermite nodes of the log-strike density.
//! * Gauss-Legendre (`GQ1`, `GQ2`, `GQn`): one or more short maturities, each
//!   with a bounded strike band. Strike mass outside an earlier band is
//!   re-spanned by the next maturity through a modified weight.
//!
//! Sign convention: [`edl`] is hedge value minus target value, and the cash
//! residual `b0` is target minus hedge, so `edl == -b0` for every portfolio.

mod gauss;
mod hermite;
mod record;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{self, ModelError, ModelSpec, OptionRef};
use crate::quadrature::QuadratureError;
use crate::scalar::Real;

pub use gauss::{build_gq1, build_gq2, build_gq_n, build_gq_n_with_orders, modified_weight};
pub use hermite::{build_cw_a, build_cw_b, hermite_strike_map};
pub use record::{parse_record, write_record};

/// Smallest allowed gap between consecutive hedge maturities (years).
pub const MIN_MATURITY_GAP: f64 = 1e-4;
/// Maximum number of short maturities in a multi-band build.
pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpanningError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid strike band [{lo}, {hi}] at maturity {maturity}")]
    InvalidBand { lo: f64, hi: f64, maturity: f64 },
    #[error("hedge maturity {maturity} must be before {later}")]
    MaturityOrder { maturity: f64, later: f64 },
    #[error("maturities {earlier} and {later} are closer than {MIN_MATURITY_GAP}; modified weights are singular there")]
    MaturitiesTooClose { earlier: f64, later: f64 },
    #[error("band [{lo}, {hi}] excludes the Hermite centre strike {centre}")]
    BandExcludesCentre { centre: f64, lo: f64, hi: f64 },
    #[error("{depth} hedge maturities requested, at most {MAX_DEPTH} supported")]
    UnsupportedDepth { depth: usize },
    #[error("at least one strike band is required")]
    NoBands,
    #[error("{bands} bands but {orders} quadrature orders")]
    OrderCount { bands: usize, orders: usize },
    #[error("PDL is undefined when the single-maturity EDL is zero")]
    UndefinedPdl,
    #[error("portfolio record line {line}: {message}")]
    Record { line: usize, message: String },
}

/// Strikes available at one hedge maturity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrikeBand<T> {
    pub maturity: T,
    pub lo: T,
    pub hi: T,
}

impl<T: Real> StrikeBand<T> {
    pub fn new(maturity: T, lo: T, hi: T) -> Result<Self, SpanningError> {
        let b = Self { maturity, lo, hi };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), SpanningError> {
        let ok = self.maturity.is_finite()
            && self.maturity > T::zero()
            && self.lo.is_finite()
            && self.hi.is_finite()
            && self.lo >= T::zero()
            && self.lo < self.hi;
        if ok {
            Ok(())
        } else {
            Err(SpanningError::InvalidBand {
                lo: self.lo.as_f64(),
                hi: self.hi.as_f64(),
                maturity: self.maturity.as_f64(),
            })
        }
    }

    pub fn contains(&self, strike: T) -> bool {
        strike >= self.lo && strike <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HedgeLeg<T> {
    pub strike: T,
    pub maturity: T,
    /// Number of calls held.
    pub weight: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodTag {
    #[serde(rename = "CW_a")]
    CwA,
    #[serde(rename = "CW_b")]
    CwB,
    #[serde(rename = "GQ1")]
    Gq1,
    #[serde(rename = "GQ2")]
    Gq2,
    #[serde(rename = "GQn")]
    GqN,
}

impl MethodTag {
    pub const ALL: [MethodTag; 5] = [MethodTag::CwA, MethodTag::CwB, MethodTag::Gq1, MethodTag::Gq2, MethodTag::GqN];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodTag::CwA => "CW_a",
            MethodTag::CwB => "CW_b",
            MethodTag::Gq1 => "GQ1",
            MethodTag::Gq2 => "GQ2",
            MethodTag::GqN => "GQn",
        }
    }
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MethodTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MethodTag::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method '{s}' (expected one of CW_a, CW_b, GQ1, GQ2, GQn)"))
    }
}

/// Inner rule orders used to evaluate modified weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifiedWeightConfig {
    /// Gauss-Legendre points on `[0, lo]` of the previous band.
    pub n_inner_gq: usize,
    /// Gauss-Laguerre points on `[hi, inf)` of the previous band.
    pub n_laguerre: usize,
}

impl Default for ModifiedWeightConfig {
    fn default() -> Self {
        Self {
            n_inner_gq: 5,
            n_laguerre: 20,
        }
    }
}

/// A static hedge: short-dated call legs plus a cash residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct HedgePortfolio<T> {
    pub method: MethodTag,
    pub target: OptionRef<T>,
    pub spot: T,
    /// Target price at inception.
    pub target_value: T,
    /// Sorted by `(maturity, strike)`.
    pub legs: Vec<HedgeLeg<T>>,
    /// Cash held at inception: target value minus leg value.
    pub b0: T,
    /// Quadrature order the builder was asked for.
    pub order: usize,
    /// Set when every candidate leg fell outside the band.
    pub empty: bool,
}

impl<T: Real> HedgePortfolio<T> {
    pub(crate) fn assemble(
        method: MethodTag,
        model: &ModelSpec<T>,
        target: OptionRef<T>,
        spot: T,
        mut legs: Vec<HedgeLeg<T>>,
        order: usize,
    ) -> Result<Self, SpanningError> {
        legs.sort_by(|a, b| {
            a.maturity
                .partial_cmp(&b.maturity)
                .unwrap()
                .then(a.strike.partial_cmp(&b.strike).unwrap())
        });
        let target_value = target.price(model, spot, T::zero())?;
        let empty = legs.is_empty();
        let mut p = Self {
            method,
            target,
            spot,
            target_value,
            legs,
            b0: T::zero(),
            order,
            empty,
        };
        p.b0 = target_value - portfolio_value(&p, model, spot, T::zero())?;
        Ok(p)
    }

    /// Value of the option legs at inception.
    pub fn hedge_value(&self) -> T {
        self.target_value - self.b0
    }

    pub fn edl(&self) -> T {
        edl(self.target_value, self.hedge_value())
    }

    /// Distinct leg maturities, ascending.
    pub fn maturities(&self) -> Vec<T> {
        let mut out: Vec<T> = Vec::new();
        for leg in &self.legs {
            if out.last().is_none_or(|&m| (leg.maturity - m).abs() > T::lit(models::TIME_EPS)) {
                out.push(leg.maturity);
            }
        }
        out
    }

    pub fn legs_at(&self, maturity: T) -> impl Iterator<Item = &HedgeLeg<T>> + '_ {
        self.legs
            .iter()
            .filter(move |l| (l.maturity - maturity).abs() <= T::lit(models::TIME_EPS))
    }
}

/// Value of the option legs (cash excluded) at `(spot, t)`.
///
/// Legs expiring exactly at `t` contribute their intrinsic value.
pub fn portfolio_value<T: Real>(portfolio: &HedgePortfolio<T>, model: &ModelSpec<T>, spot: T, t: T) -> Result<T, SpanningError> {
    let mut acc = T::zero();
    for leg in &portfolio.legs {
        acc = acc + leg.weight * models::call_price(model, spot, t, leg.strike, leg.maturity)?;
    }
    Ok(acc)
}

/// Expected discounted loss: hedge value minus target value.
pub fn edl<T: Real>(target_value: T, hedge_value: T) -> T {
    hedge_value - target_value
}

/// Percentage reduction in `|EDL|` from the one-maturity to the two-maturity hedge.
pub fn pdl<T: Real>(edl_gq1: T, edl_gq2: T) -> Result<T, SpanningError> {
    if edl_gq1 == T::zero() || !edl_gq1.is_finite() {
        return Err(SpanningError::UndefinedPdl);
    }
    Ok((edl_gq1.abs() - edl_gq2.abs()) / edl_gq1.abs() * T::lit(100.0))
}

fn check_short_maturity<T: Real>(band: &StrikeBand<T>, later: T) -> Result<(), SpanningError> {
    band.validate()?;
    if band.maturity >= later {
        return Err(SpanningError::MaturityOrder {
            maturity: band.maturity.as_f64(),
            later: later.as_f64(),
        });
    }
    Ok(())
}
