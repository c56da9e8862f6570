//! Merton jump-diffusion as a Poisson mixture of Black-Scholes terms.

use super::normal::{norm_cdf, norm_pdf};
use super::{MjdParams, ModelError, MJD_MAX_TERMS, MJD_MIN_TERMS, MJD_TAIL_PROB};
use crate::scalar::Real;

/// One conditional Black-Scholes term: `n` jumps over the horizon.
#[derive(Debug, Clone, Copy)]
pub(super) struct Term<T> {
    pub prob: T,
    /// Jump-adjusted rate `r_n`.
    pub rate: T,
    /// Jump-adjusted volatility `sigma_n`.
    pub vol: T,
}

/// Folds `f` over the truncated Poisson series for horizon `tau`, with
/// `extra` terms beyond the standard truncation point.
pub(super) fn fold_terms<T, F>(p: &MjdParams<T>, tau: T, extra: usize, mut f: F) -> Result<T, ModelError>
where
    T: Real,
    F: FnMut(Term<T>) -> T,
{
    let half = T::lit(0.5);
    let g = p.jump_compensator();
    let lam_tau = p.lambda * tau;
    let jump_drift = p.mu_j + half * p.sigma_j * p.sigma_j;
    let sig2 = p.sigma * p.sigma;
    let sj2 = p.sigma_j * p.sigma_j;

    if lam_tau <= T::zero() {
        return Ok(f(Term {
            prob: T::one(),
            rate: p.r - p.lambda * g,
            vol: p.sigma,
        }));
    }

    let ln_lam_tau = lam_tau.ln();
    let mut ln_prob = -lam_tau;
    let mut acc = T::zero();
    let mut stop_at: Option<usize> = None;
    for n in 0..MJD_MAX_TERMS + extra {
        let nf = T::from_usize_lossy(n);
        if n > 0 {
            ln_prob = ln_prob + ln_lam_tau - nf.ln();
        }
        let prob = ln_prob.exp();
        acc = acc
            + f(Term {
                prob,
                rate: p.r - p.lambda * g + nf * jump_drift / tau,
                vol: (sig2 + nf * sj2 / tau).sqrt(),
            });
        if stop_at.is_none() && n >= MJD_MIN_TERMS && prob < T::lit(MJD_TAIL_PROB) {
            stop_at = Some(n + extra);
        }
        if stop_at == Some(n) {
            return Ok(acc);
        }
    }
    Err(ModelError::SeriesNotConverged { terms: MJD_MAX_TERMS })
}

#[inline]
fn d1n<T: Real>(p: &MjdParams<T>, term: &Term<T>, spot: T, strike: T, tau: T) -> (T, T) {
    let vol_sqrt = term.vol * tau.sqrt();
    let d = ((spot / strike).ln() + (term.rate - p.delta_yield + term.vol * term.vol / T::lit(2.0)) * tau) / vol_sqrt;
    (d, vol_sqrt)
}

pub(super) fn call<T: Real>(p: &MjdParams<T>, spot: T, strike: T, tau: T, extra: usize) -> Result<T, ModelError> {
    let sum = fold_terms(p, tau, extra, |term| {
        let (d1, vol_sqrt) = d1n(p, &term, spot, strike, tau);
        term.prob * (spot * ((term.rate - p.delta_yield) * tau).exp() * norm_cdf(d1) - strike * norm_cdf(d1 - vol_sqrt))
    })?;
    Ok(((-p.r * tau).exp() * sum).max(T::zero()))
}

pub(super) fn delta<T: Real>(p: &MjdParams<T>, spot: T, strike: T, tau: T) -> Result<T, ModelError> {
    let sum = fold_terms(p, tau, 0, |term| {
        let (d1, _) = d1n(p, &term, spot, strike, tau);
        term.prob * ((term.rate - p.delta_yield) * tau).exp() * norm_cdf(d1)
    })?;
    Ok((-p.r * tau).exp() * sum)
}

pub(super) fn gamma<T: Real>(p: &MjdParams<T>, spot: T, strike: T, tau: T) -> Result<T, ModelError> {
    let sum = fold_terms(p, tau, 0, |term| {
        let (d1, vol_sqrt) = d1n(p, &term, spot, strike, tau);
        term.prob * ((term.rate - p.delta_yield) * tau).exp() * norm_pdf(d1) / (spot * vol_sqrt)
    })?;
    Ok((-p.r * tau).exp() * sum)
}

/// Call price with `extra` series terms past the truncation point.
#[cfg(test)]
pub(super) fn call_with_extra_terms<T: Real>(p: &MjdParams<T>, spot: T, strike: T, tau: T, extra: usize) -> Result<T, ModelError> {
    call(p, spot, strike, tau, extra)
}
