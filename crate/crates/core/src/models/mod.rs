//! Closed-form risk-neutral pricing under Black-Scholes and Merton
//! jump-diffusion dynamics.
//!
//! Every operation takes a [`ModelSpec`] and dispatches on the variant. Time
//! arguments are absolute (years); `tau = maturity - t`. At `t == maturity`
//! prices collapse to intrinsic value.

mod bs;
mod mjd;
mod normal;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use normal::{norm_cdf, norm_pdf};

/// Minimum time to expiry used inside the `d`-terms.
pub const TAU_FLOOR: f64 = 1e-10;
/// Two times closer than this are treated as equal.
pub const TIME_EPS: f64 = 1e-12;

/// Smallest number of Poisson terms in the jump-diffusion series.
pub const MJD_MIN_TERMS: usize = 20;
/// Tail probability at which the jump-diffusion series stops.
pub const MJD_TAIL_PROB: f64 = 1e-14;
/// Hard cap on jump-diffusion series terms.
pub const MJD_MAX_TERMS: usize = 180;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("valuation time {t} is past maturity {maturity}")]
    PastMaturity { t: f64, maturity: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("jump-diffusion series did not converge within {terms} terms")]
    SeriesNotConverged { terms: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"))]
pub struct BsParams<T> {
    /// Continuously compounded risk-free rate.
    pub r: T,
    /// Continuous dividend yield.
    #[serde(rename = "delta")]
    pub delta_yield: T,
    pub sigma: T,
    /// Real-world drift, used only by path simulation.
    #[serde(default)]
    pub mu: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"))]
pub struct MjdParams<T> {
    pub r: T,
    #[serde(rename = "delta")]
    pub delta_yield: T,
    /// Diffusive volatility.
    pub sigma: T,
    #[serde(default)]
    pub mu: T,
    /// Jump intensity per year.
    pub lambda: T,
    /// Mean log jump size.
    pub mu_j: T,
    /// Log jump volatility.
    pub sigma_j: T,
}

fn check_finite<T: Real>(name: &'static str, v: T) -> Result<(), ModelError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFinite { name, value: v.as_f64() })
    }
}

fn check_positive<T: Real>(name: &'static str, v: T) -> Result<(), ModelError> {
    check_finite(name, v)?;
    if v > T::zero() {
        Ok(())
    } else {
        Err(ModelError::NonPositive { name, value: v.as_f64() })
    }
}

impl<T: Real> BsParams<T> {
    pub fn new(r: T, delta_yield: T, sigma: T, mu: T) -> Result<Self, ModelError> {
        let p = Self { r, delta_yield, sigma, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_finite("r", self.r)?;
        check_finite("delta", self.delta_yield)?;
        check_finite("mu", self.mu)?;
        check_positive("sigma", self.sigma)
    }
}

impl<T: Real> MjdParams<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(r: T, delta_yield: T, sigma: T, mu: T, lambda: T, mu_j: T, sigma_j: T) -> Result<Self, ModelError> {
        let p = Self {
            r,
            delta_yield,
            sigma,
            mu,
            lambda,
            mu_j,
            sigma_j,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_finite("r", self.r)?;
        check_finite("delta", self.delta_yield)?;
        check_finite("mu", self.mu)?;
        check_finite("mu_j", self.mu_j)?;
        check_positive("sigma", self.sigma)?;
        check_positive("sigma_j", self.sigma_j)?;
        check_finite("lambda", self.lambda)?;
        if self.lambda < T::zero() {
            return Err(ModelError::NonPositive {
                name: "lambda",
                value: self.lambda.as_f64(),
            });
        }
        check_finite("jump compensator", self.jump_compensator())
    }

    /// Mean percentage jump `g = exp(mu_j + sigma_j^2 / 2) - 1`.
    pub fn jump_compensator(&self) -> T {
        (self.mu_j + self.sigma_j * self.sigma_j / T::lit(2.0)).exp() - T::one()
    }

    /// Annualized return variance `sigma^2 + lambda (mu_j^2 + sigma_j^2)`.
    pub fn annualized_variance(&self) -> T {
        self.sigma * self.sigma + self.lambda * (self.mu_j * self.mu_j + self.sigma_j * self.sigma_j)
    }

    /// Diffusive volatility that keeps the annualized variance at `variance`
    /// for the current jump parameters, if one exists.
    pub fn sigma_for_variance(&self, variance: T) -> Option<T> {
        let diffusive = variance - self.lambda * (self.mu_j * self.mu_j + self.sigma_j * self.sigma_j);
        (diffusive > T::zero()).then(|| diffusive.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"))]
pub enum ModelSpec<T> {
    Bs(BsParams<T>),
    Mjd(MjdParams<T>),
}

impl<T: Real> ModelSpec<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ModelSpec::Bs(p) => p.validate(),
            ModelSpec::Mjd(p) => p.validate(),
        }
    }

    pub fn rate(&self) -> T {
        match self {
            ModelSpec::Bs(p) => p.r,
            ModelSpec::Mjd(p) => p.r,
        }
    }

    pub fn dividend_yield(&self) -> T {
        match self {
            ModelSpec::Bs(p) => p.delta_yield,
            ModelSpec::Mjd(p) => p.delta_yield,
        }
    }

    pub fn real_world_drift(&self) -> T {
        match self {
            ModelSpec::Bs(p) => p.mu,
            ModelSpec::Mjd(p) => p.mu,
        }
    }

    /// Total annualized return variance (`sigma^2` for Black-Scholes).
    pub fn total_variance_rate(&self) -> T {
        match self {
            ModelSpec::Bs(p) => p.sigma * p.sigma,
            ModelSpec::Mjd(p) => p.annualized_variance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

/// A European option contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionRef<T> {
    pub strike: T,
    pub maturity: T,
    pub kind: OptionKind,
}

impl<T: Real> OptionRef<T> {
    pub fn call(strike: T, maturity: T) -> Result<Self, ModelError> {
        check_positive("strike", strike)?;
        check_positive("maturity", maturity)?;
        Ok(Self {
            strike,
            maturity,
            kind: OptionKind::Call,
        })
    }

    pub fn put(strike: T, maturity: T) -> Result<Self, ModelError> {
        let mut o = Self::call(strike, maturity)?;
        o.kind = OptionKind::Put;
        Ok(o)
    }

    pub fn price(&self, model: &ModelSpec<T>, spot: T, t: T) -> Result<T, ModelError> {
        match self.kind {
            OptionKind::Call => call_price(model, spot, t, self.strike, self.maturity),
            OptionKind::Put => put_price(model, spot, t, self.strike, self.maturity),
        }
    }
}

enum Horizon<T> {
    Expired,
    Live(T),
}

fn horizon<T: Real>(t: T, maturity: T) -> Result<Horizon<T>, ModelError> {
    let tau = maturity - t;
    if tau.abs() <= T::lit(TIME_EPS) {
        Ok(Horizon::Expired)
    } else if tau < T::zero() {
        Err(ModelError::PastMaturity {
            t: t.as_f64(),
            maturity: maturity.as_f64(),
        })
    } else {
        Ok(Horizon::Live(tau.max(T::lit(TAU_FLOOR))))
    }
}

fn check_spot_strike<T: Real>(spot: T, strike: T) -> Result<(), ModelError> {
    check_positive("spot", spot)?;
    check_positive("strike", strike)
}

/// Call value at time `t` with spot `spot`, strike `strike`, expiry `maturity`.
pub fn call_price<T: Real>(model: &ModelSpec<T>, spot: T, t: T, strike: T, maturity: T) -> Result<T, ModelError> {
    check_spot_strike(spot, strike)?;
    let tau = match horizon(t, maturity)? {
        Horizon::Expired => return Ok((spot - strike).max(T::zero())),
        Horizon::Live(tau) => tau,
    };
    match model {
        ModelSpec::Bs(p) => Ok(bs::call(p, spot, strike, tau)),
        ModelSpec::Mjd(p) => mjd::call(p, spot, strike, tau, 0),
    }
}

/// Put value by put-call parity.
pub fn put_price<T: Real>(model: &ModelSpec<T>, spot: T, t: T, strike: T, maturity: T) -> Result<T, ModelError> {
    let call = call_price(model, spot, t, strike, maturity)?;
    let tau = (maturity - t).max(T::zero());
    let put = call - spot * (-model.dividend_yield() * tau).exp() + strike * (-model.rate() * tau).exp();
    Ok(put.max(T::zero()))
}

/// Spot delta of the call.
pub fn delta<T: Real>(model: &ModelSpec<T>, spot: T, t: T, strike: T, maturity: T) -> Result<T, ModelError> {
    check_spot_strike(spot, strike)?;
    let tau = match horizon(t, maturity)? {
        Horizon::Expired => return Ok(if spot > strike { T::one() } else { T::zero() }),
        Horizon::Live(tau) => tau,
    };
    match model {
        ModelSpec::Bs(p) => Ok(bs::delta(p, spot, strike, tau)),
        ModelSpec::Mjd(p) => mjd::delta(p, spot, strike, tau),
    }
}

/// Spot gamma of the call `C(x, u, strike, maturity)` seen as a function of
/// the time-`u` spot level `x`.
///
/// This is the static-hedge weight on a `u`-maturity call struck at `x`; it
/// equals the `[u, maturity]` transition density from `x` to `strike`,
/// discounted, with the roles of spot and strike exchanged.
pub fn strike_gamma_weight<T: Real>(model: &ModelSpec<T>, x: T, u: T, strike: T, maturity: T) -> Result<T, ModelError> {
    check_spot_strike(x, strike)?;
    let tau = maturity - u;
    if tau <= T::zero() {
        return Err(ModelError::PastMaturity {
            t: u.as_f64(),
            maturity: maturity.as_f64(),
        });
    }
    let tau = tau.max(T::lit(TAU_FLOOR));
    match model {
        ModelSpec::Bs(p) => Ok(bs::gamma(p, x, strike, tau)),
        ModelSpec::Mjd(p) => mjd::gamma(p, x, strike, tau),
    }
}

/// Annualized variance `sigma^2 + lambda (mu_j^2 + sigma_j^2)`.
pub fn annualized_variance<T: Real>(params: &MjdParams<T>) -> T {
    params.annualized_variance()
}

#[cfg(test)]
mod tests;
