use super::{check_short_maturity, HedgeLeg, HedgePortfolio, MethodTag, SpanningError, StrikeBand};
use crate::models::{self, ModelSpec, OptionRef};
use crate::quadrature::{make_rule, RuleKind};
use crate::scalar::Real;

/// Gauss-Hermite strikes and quantities for hedging `target` with calls
/// maturing at `u`.
///
/// The log-strike is centred on the risk-neutral forward with variance
/// `s^2 (T - u)`, where `s` is the Black-Scholes volatility or, under jumps,
/// the square root of the annualized variance. Strikes ascend.
pub fn hermite_strike_map<T: Real>(model: &ModelSpec<T>, strike: T, maturity: T, u: T, n: usize) -> Result<Vec<(T, T)>, SpanningError> {
    let tau = maturity - u;
    if tau <= T::zero() {
        return Err(models::ModelError::PastMaturity {
            t: u.as_f64(),
            maturity: maturity.as_f64(),
        }
        .into());
    }
    let s2 = model.total_variance_rate();
    let scale = (T::lit(2.0) * s2 * tau).sqrt();
    let drift = (model.dividend_yield() - model.rate() - s2 / T::lit(2.0)) * tau;
    let rule = make_rule::<T>(RuleKind::Hermite, n)?;
    rule.iter()
        .map(|(x, w)| {
            let k = strike * (x * scale + drift).exp();
            let gamma = models::strike_gamma_weight(model, k, u, strike, maturity)?;
            // w * exp(x^2) overflows for large orders if done in two steps.
            let w_scaled = (w.ln() + x * x).exp();
            Ok((k, gamma * k * scale * w_scaled))
        })
        .collect()
}

fn legs_from_map<T: Real>(map: &[(T, T)], u: T) -> Vec<HedgeLeg<T>> {
    map.iter()
        .map(|&(strike, weight)| HedgeLeg {
            strike,
            maturity: u,
            weight,
        })
        .collect()
}

/// `CW_a`: the largest Hermite order whose strikes all lie inside the band.
pub fn build_cw_a<T: Real>(
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
    spot: T,
    band: &StrikeBand<T>,
) -> Result<HedgePortfolio<T>, SpanningError> {
    check_short_maturity(band, target.maturity)?;
    let fits = |n: usize| -> Result<Option<Vec<(T, T)>>, SpanningError> {
        let map = hermite_strike_map(model, target.strike, target.maturity, band.maturity, n)?;
        Ok(map.iter().all(|&(k, _)| band.contains(k)).then_some(map))
    };
    let Some(mut best) = fits(1)? else {
        let centre = hermite_strike_map(model, target.strike, target.maturity, band.maturity, 1)?[0].0;
        return Err(SpanningError::BandExcludesCentre {
            centre: centre.as_f64(),
            lo: band.lo.as_f64(),
            hi: band.hi.as_f64(),
        });
    };
    let mut order = 1;
    for n in 2..=RuleKind::Hermite.max_order() {
        match fits(n)? {
            Some(map) => {
                best = map;
                order = n;
            }
            None => break,
        }
    }
    HedgePortfolio::assemble(MethodTag::CwA, model, *target, spot, legs_from_map(&best, band.maturity), order)
}

/// `CW_b`: a fixed Hermite order with out-of-band strikes dropped.
pub fn build_cw_b<T: Real>(
    model: &ModelSpec<T>,
    target: &OptionRef<T>,
    spot: T,
    band: &StrikeBand<T>,
    n: usize,
) -> Result<HedgePortfolio<T>, SpanningError> {
    check_short_maturity(band, target.maturity)?;
    let map = hermite_strike_map(model, target.strike, target.maturity, band.maturity, n)?;
    let kept: Vec<(T, T)> = map.into_iter().filter(|&(k, _)| band.contains(k)).collect();
    HedgePortfolio::assemble(MethodTag::CwB, model, *target, spot, legs_from_map(&kept, band.maturity), n)
}
