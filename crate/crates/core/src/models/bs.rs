use super::normal::{norm_cdf, norm_pdf};
use super::BsParams;
use crate::scalar::Real;

#[inline]
fn d1<T: Real>(p: &BsParams<T>, spot: T, strike: T, tau: T) -> (T, T) {
    let vol_sqrt = p.sigma * tau.sqrt();
    let d1 = ((spot / strike).ln() + (p.r - p.delta_yield + p.sigma * p.sigma / T::lit(2.0)) * tau) / vol_sqrt;
    (d1, vol_sqrt)
}

pub(super) fn call<T: Real>(p: &BsParams<T>, spot: T, strike: T, tau: T) -> T {
    let (d1, vol_sqrt) = d1(p, spot, strike, tau);
    let price = spot * (-p.delta_yield * tau).exp() * norm_cdf(d1) - strike * (-p.r * tau).exp() * norm_cdf(d1 - vol_sqrt);
    price.max(T::zero())
}

pub(super) fn delta<T: Real>(p: &BsParams<T>, spot: T, strike: T, tau: T) -> T {
    let (d1, _) = d1(p, spot, strike, tau);
    (-p.delta_yield * tau).exp() * norm_cdf(d1)
}

pub(super) fn gamma<T: Real>(p: &BsParams<T>, spot: T, strike: T, tau: T) -> T {
    let (d1, vol_sqrt) = d1(p, spot, strike, tau);
    (-p.delta_yield * tau).exp() * norm_pdf(d1) / (spot * vol_sqrt)
}
