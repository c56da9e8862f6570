use rayon::prelude::*;

use super::{
    check_short_maturity, HedgeLeg, HedgePortfolio, MethodTag, ModifiedWeightConfig, SpanningError, StrikeBand, MAX_DEPTH, MIN_MATURITY_GAP,
};
use crate::models::{self, ModelSpec, OptionRef};
use crate::quadrature::{integrate_bounded, integrate_shifted_laguerre, make_rule, map_to_interval, RuleKind};
use crate::scalar::Real;

struct Ctx<'a, T> {
    model: &'a ModelSpec<T>,
    target: &'a OptionRef<T>,
    cfg: ModifiedWeightConfig,
}

impl<T: Real> Ctx<'_, T> {
    /// Weight on a call struck at `k` maturing at `u`, given that the bands in
    /// `earlier` (latest maturity first) have already been hedged.
    ///
    /// With no earlier bands this is the plain gamma weight against the
    /// target; otherwise it integrates the previous level's weight over the
    /// strikes the previous band could not reach.
    fn weight(&self, earlier: &[StrikeBand<T>], u: T, k: T) -> Result<T, SpanningError> {
        let Some((prev, rest)) = earlier.split_last() else {
            return Ok(models::strike_gamma_weight(
                self.model,
                k,
                u,
                self.target.strike,
                self.target.maturity,
            )?);
        };
        let mut failure = None;
        let mut kernel = |y: T| -> T {
            let v = self
                .weight(rest, prev.maturity, y)
                .and_then(|outer| Ok(outer * models::strike_gamma_weight(self.model, k, u, y, prev.maturity)?));
            v.unwrap_or_else(|e| {
                failure.get_or_insert(e);
                T::zero()
            })
        };
        let left = if prev.lo > T::zero() {
            integrate_bounded(&mut kernel, T::zero(), prev.lo, self.cfg.n_inner_gq)?
        } else {
            T::zero()
        };
        let right = integrate_shifted_laguerre(&mut kernel, prev.hi, self.cfg.n_laguerre)?;
        match failure {
            Some(e) => Err(e),
            None => Ok(left + right),
        }
    }
}

fn check_gap<T: Real>(earlier: T, later: T) -> Result<(), SpanningError> {
    if later >= earlier {
        return Err(SpanningError::MaturityOrder {
            maturity: earlier.as_f64(),
            later: later.as_f64(),
        });
    }
    if earlier - later < T::lit(MIN_MATURITY_GAP) {
        return Err(SpanningError::MaturitiesTooClose {
            earlier: earlier.as_f64(),
            later: later.as_f64(),
        });
    }
    Ok(())
}

fn check_chain<T: Real>(target: &OptionRef<T>, bands: &[StrikeBand<T>]) -> Result<(), SpanningError> {
    let first = bands.first().ok_or(SpanningError::NoBands)?;
    if bands.len() > MAX_DEPTH {
        return Err(SpanningError::UnsupportedDepth { depth: bands.len() });
    }
    check_short_maturity(first, target.maturity)?;
    for pair in bands.windows(2) {
        pair[1].validate()?;
        check_gap(pair[0].maturity, pair[1].maturity)?;
    }
    Ok(())
}

/// Modified weight on a call struck at `k2` maturing at `u2`, covering the
/// strike mass that `band1` leaves unhedged.
pub fn modified_weight<T: Real>(
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
    k2: T,
    band1: &StrikeBand<T>,
    u2: T,
    cfg: ModifiedWeightConfig,
) -> Result<T, SpanningError> {
    check_short_maturity(band1, target.maturity)?;
    check_gap(band1.maturity, u2)?;
    let ctx = Ctx { model, target, cfg };
    ctx.weight(std::slice::from_ref(band1), u2, k2)
}

fn build<T: Real>(
    method: MethodTag,
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
    spot: T,
    bands: &[StrikeBand<T>],
    orders: &[usize],
    cfg: ModifiedWeightConfig,
) -> Result<HedgePortfolio<T>, SpanningError> {
    check_chain(target, bands)?;
    if orders.len() != bands.len() {
        return Err(SpanningError::OrderCount {
            bands: bands.len(),
            orders: orders.len(),
        });
    }
    let ctx = Ctx { model, target, cfg };
    let mut legs = Vec::new();
    for (i, (band, &n)) in bands.iter().zip(orders).enumerate() {
        let rule = map_to_interval(&*make_rule::<T>(RuleKind::Legendre, n)?, band.lo, band.hi)?;
        let level: Vec<HedgeLeg<T>> = rule
            .nodes()
            .par_iter()
            .zip(rule.weights().par_iter())
            .map(|(&k, &a)| {
                Ok(HedgeLeg {
                    strike: k,
                    maturity: band.maturity,
                    weight: a * ctx.weight(&bands[..i], band.maturity, k)?,
                })
            })
            .collect::<Result<_, SpanningError>>()?;
        legs.extend(level);
    }
    HedgePortfolio::assemble(method, model, *target, spot, legs, orders[0])
}

/// `GQ1`: Gauss-Legendre strikes across one band.
pub fn build_gq1<T: Real>(
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
    spot: T,
    band: &StrikeBand<T>,
    n: usize,
) -> Result<HedgePortfolio<T>, SpanningError> {
    build(
        MethodTag::Gq1,
        model,
        target,
        spot,
        std::slice::from_ref(band),
        &[n],
        ModifiedWeightConfig::default(),
    )
}

/// `GQ2`: `band1` hedged as in [`build_gq1`], the strikes it misses re-spanned
/// by calls in `band2` at an earlier maturity.
pub fn build_gq2<T: Real>(
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
    spot: T,
    band1: &StrikeBand<T>,
    band2: &StrikeBand<T>,
    n: usize,
    cfg: ModifiedWeightConfig,
) -> Result<HedgePortfolio<T>, SpanningError> {
    build(MethodTag::Gq2, model, target, spot, &[*band1, *band2], &[n, n], cfg)
}

/// `GQn`: bands ordered from the latest maturity to the earliest, each level
/// re-spanning what the previous one could not reach.
pub fn build_gq_n<T: Real>(
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
    spot: T,
    bands: &[StrikeBand<T>],
    n: usize,
    cfg: ModifiedWeightConfig,
) -> Result<HedgePortfolio<T>, SpanningError> {
    build(MethodTag::GqN, model, target, spot, bands, &vec![n; bands.len()], cfg)
}

/// [`build_gq_n`] with a separate Legendre order per band.
pub fn build_gq_n_with_orders<T: Real>(
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
    spot: T,
    bands: &[StrikeBand<T>],
    orders: &[usize],
    cfg: ModifiedWeightConfig,
) -> Result<HedgePortfolio<T>, SpanningError> {
    build(MethodTag::GqN, model, target, spot, bands, orders, cfg)
}
