use libm::erfc;

use crate::scalar::Real;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal cdf through the complementary error function, accurate in
/// both tails.
#[inline]
pub fn norm_cdf<T: Real>(x: T) -> T {
    let x = x.as_f64();
    T::lit(0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2))
}

#[inline]
pub fn norm_pdf<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    T::lit(INV_SQRT_2PI) * (-half * x * x).exp()
}
