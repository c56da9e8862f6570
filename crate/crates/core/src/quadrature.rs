//! Gauss-Legendre, Gauss-Hermite and Gauss-Laguerre rules.
//!
//! Nodes come from the eigenvalues of the symmetric tridiagonal Jacobi matrix
//! of the three-term recurrence (Golub-Welsch), polished with Newton steps on
//! the orthonormal recurrence. Weights use the Christoffel form
//! `1 / sum_k p_k(x)^2`, accumulated with rescaling so that high orders do
//! not overflow. All node computation happens in `f64`; rules of other
//! scalar types are cast from it.
//!
//! Rules are cached per `(scalar type, kind, order)` and shared as `Arc`s.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Largest order accepted for Legendre and Hermite rules.
pub const MAX_ORDER: usize = 200;
/// Largest Laguerre order whose smallest weight is still a normal `f64`.
pub const MAX_LAGUERRE_ORDER: usize = 180;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    Legendre,
    Hermite,
    Laguerre,
}

impl RuleKind {
    pub fn max_order(self) -> usize {
        match self {
            RuleKind::Legendre | RuleKind::Hermite => MAX_ORDER,
            RuleKind::Laguerre => MAX_LAGUERRE_ORDER,
        }
    }

    /// Integral of the weight function over the canonical domain.
    fn moment0(self) -> f64 {
        match self {
            RuleKind::Legendre => 2.0,
            RuleKind::Hermite => std::f64::consts::PI.sqrt(),
            RuleKind::Laguerre => 1.0,
        }
    }

    /// Diagonal `a_k` and sub-diagonal `b_k` (k >= 1) of the Jacobi matrix
    /// for the orthonormal polynomials of this family.
    fn recurrence(self, k: usize) -> (f64, f64) {
        let kf = k as f64;
        match self {
            RuleKind::Legendre => (0.0, kf / (4.0 * kf * kf - 1.0).sqrt()),
            RuleKind::Hermite => (0.0, (kf / 2.0).sqrt()),
            RuleKind::Laguerre => (2.0 * kf + 1.0, kf),
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleKind::Legendre => "Legendre",
            RuleKind::Hermite => "Hermite",
            RuleKind::Laguerre => "Laguerre",
        };
        f.write_str(s)
    }
}

/// Domain a rule integrates over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain<T> {
    /// Bounded interval; `[-1, 1]` for a canonical Legendre rule.
    Interval { lo: T, hi: T },
    /// `(-inf, inf)` against `exp(-x^2)`.
    RealLine,
    /// `[0, inf)` against `exp(-x)`.
    HalfLine,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature order must be at least 1")]
    ZeroOrder,
    #[error("{kind} order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { kind: RuleKind, order: usize, max: usize },
    #[error("invalid integration interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("interval mapping needs a Legendre rule, got {0}")]
    NotLegendre(RuleKind),
    #[error("integrand is not finite at node {node} (value {value})")]
    NonFinite { node: f64, value: f64 },
}

/// Nodes and weights of a Gaussian rule. Nodes ascend; weights are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    kind: RuleKind,
    nodes: Vec<T>,
    weights: Vec<T>,
    domain: Domain<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn domain(&self) -> Domain<T> {
        self.domain
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `sum_i w_i f(x_i)`, failing on the first non-finite evaluation.
    pub fn integrate<F>(&self, mut f: F) -> Result<T, QuadratureError>
    where
        F: FnMut(T) -> T,
    {
        let mut acc = T::zero();
        for (x, w) in self.iter() {
            let v = f(x);
            if !v.is_finite() {
                return Err(QuadratureError::NonFinite {
                    node: x.as_f64(),
                    value: v.as_f64(),
                });
            }
            acc = acc + w * v;
        }
        Ok(acc)
    }
}

type CacheKey = (TypeId, RuleKind, usize);
type Cache = RwLock<HashMap<CacheKey, Arc<dyn Any + Send + Sync>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Gaussian rule of the given family and order on its canonical domain.
pub fn make_rule<T: Real>(kind: RuleKind, n: usize) -> Result<Arc<QuadratureRule<T>>, QuadratureError> {
    if n == 0 {
        return Err(QuadratureError::ZeroOrder);
    }
    if n > kind.max_order() {
        return Err(QuadratureError::OrderTooLarge {
            kind,
            order: n,
            max: kind.max_order(),
        });
    }
    let key = (TypeId::of::<T>(), kind, n);
    if let Some(hit) = cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(hit)
            .downcast::<QuadratureRule<T>>()
            .expect("cache entry type matches key"));
    }

    // Built outside the lock; a racing thread may build the same rule, the
    // first insert wins and both results are identical.
    let (nodes, weights) = golub_welsch(kind, n);
    let domain = match kind {
        RuleKind::Legendre => Domain::Interval {
            lo: -T::one(),
            hi: T::one(),
        },
        RuleKind::Hermite => Domain::RealLine,
        RuleKind::Laguerre => Domain::HalfLine,
    };
    let rule: Arc<dyn Any + Send + Sync> = Arc::new(QuadratureRule {
        kind,
        nodes: nodes.into_iter().map(T::lit).collect(),
        weights: weights.into_iter().map(T::lit).collect(),
        domain,
    });
    let mut guard = cache().write().expect("rule cache poisoned");
    let entry = guard.entry(key).or_insert(rule);
    Ok(Arc::clone(entry)
        .downcast::<QuadratureRule<T>>()
        .expect("cache entry type matches key"))
}

/// Affine map of a Legendre rule onto `[a, b]`.
pub fn map_to_interval<T: Real>(rule: &QuadratureRule<T>, a: T, b: T) -> Result<QuadratureRule<T>, QuadratureError> {
    if rule.kind != RuleKind::Legendre {
        return Err(QuadratureError::NotLegendre(rule.kind));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QuadratureError::InvalidInterval {
            lo: a.as_f64(),
            hi: b.as_f64(),
        });
    }
    // The source rule may itself be mapped; pull it back to [-1, 1] first.
    let (src_lo, src_hi) = match rule.domain {
        Domain::Interval { lo, hi } => (lo, hi),
        _ => unreachable!("Legendre rules live on intervals"),
    };
    let two = T::lit(2.0);
    let src_half = (src_hi - src_lo) / two;
    let src_mid = (src_hi + src_lo) / two;
    let half = (b - a) / two;
    let mid = (a + b) / two;
    let nodes = rule.nodes.iter().map(|&x| half * ((x - src_mid) / src_half) + mid).collect();
    let weights = rule.weights.iter().map(|&w| half * (w / src_half)).collect();
    Ok(QuadratureRule {
        kind: RuleKind::Legendre,
        nodes,
        weights,
        domain: Domain::Interval { lo: a, hi: b },
    })
}

/// `int_a^b f(x) dx` with an `n`-point Gauss-Legendre rule.
pub fn integrate_bounded<T, F>(f: F, a: T, b: T, n: usize) -> Result<T, QuadratureError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let rule = make_rule::<T>(RuleKind::Legendre, n)?;
    map_to_interval(&rule, a, b)?.integrate(f)
}

/// `int_a^inf f(x) dx` with an `n`-point Gauss-Laguerre rule shifted to `a`.
///
/// The Laguerre weight `exp(-x)` is divided out at every node, so `f` is the
/// plain integrand: the sum is `sum_i w_i exp(x_i) f(x_i + a)`.
pub fn integrate_shifted_laguerre<T, F>(mut f: F, a: T, n: usize) -> Result<T, QuadratureError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !a.is_finite() {
        return Err(QuadratureError::InvalidInterval {
            lo: a.as_f64(),
            hi: f64::INFINITY,
        });
    }
    let rule = make_rule::<T>(RuleKind::Laguerre, n)?;
    let mut acc = T::zero();
    for (x, w) in rule.iter() {
        let node = x + a;
        let v = f(node);
        if !v.is_finite() {
            return Err(QuadratureError::NonFinite {
                node: node.as_f64(),
                value: v.as_f64(),
            });
        }
        // w * e^x can overflow for large orders even when the product with
        // f is tiny; fold the exponent into the weight's logarithm.
        acc = acc + (w.ln() + x).exp() * v;
    }
    Ok(acc)
}

/// Orthonormal `p_n(x)` and `p_n'(x)` up to a common positive scale factor.
fn orthonormal_with_derivative(kind: RuleKind, n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = 1.0 / kind.moment0().sqrt();
    let mut d_prev = 0.0;
    let mut d = 0.0;
    for k in 0..n {
        let (a_k, b_k) = kind.recurrence(k);
        let (_, b_next) = kind.recurrence(k + 1);
        let b_k = if k == 0 { 0.0 } else { b_k };
        let p_next = ((x - a_k) * p - b_k * p_prev) / b_next;
        let d_next = (p + (x - a_k) * d - b_k * d_prev) / b_next;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        let mag = p.abs().max(d.abs());
        if mag > 1e150 {
            p *= 1e-150;
            p_prev *= 1e-150;
            d *= 1e-150;
            d_prev *= 1e-150;
        }
    }
    (p, d)
}

/// Christoffel weight `1 / sum_{k<n} p_k(x)^2` with rescaling.
fn christoffel_weight(kind: RuleKind, n: usize, x: f64) -> f64 {
    const SCALE: f64 = 1e-150;
    let ln_scale = -SCALE.ln();
    let mut p_prev = 0.0;
    let mut p = 1.0 / kind.moment0().sqrt();
    let mut sum = p * p;
    // true value = stored * exp(log_scale)
    let mut log_scale = 0.0;
    for k in 0..n - 1 {
        let (a_k, b_k) = kind.recurrence(k);
        let (_, b_next) = kind.recurrence(k + 1);
        let b_k = if k == 0 { 0.0 } else { b_k };
        let p_next = ((x - a_k) * p - b_k * p_prev) / b_next;
        p_prev = p;
        p = p_next;
        if p.abs() > 1e150 {
            p *= SCALE;
            p_prev *= SCALE;
            sum *= SCALE * SCALE;
            log_scale += ln_scale;
        }
        sum += p * p;
    }
    (-(sum.ln() + 2.0 * log_scale)).exp()
}

fn golub_welsch(kind: RuleKind, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let (a_k, _) = kind.recurrence(k);
        jacobi[(k, k)] = a_k;
        if k + 1 < n {
            let (_, b) = kind.recurrence(k + 1);
            jacobi[(k, k + 1)] = b;
            jacobi[(k + 1, k)] = b;
        }
    }
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(f64::total_cmp);

    for x in nodes.iter_mut() {
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = orthonormal_with_derivative(kind, n, *x);
            if d == 0.0 {
                break;
            }
            let step = p / d;
            *x -= step;
            if step.abs() <= NEWTON_TOL * x.abs().max(1.0) {
                break;
            }
        }
    }
    nodes.sort_by(f64::total_cmp);
    let mut weights: Vec<f64> = nodes.iter().map(|&x| christoffel_weight(kind, n, x)).collect();

    if matches!(kind, RuleKind::Legendre | RuleKind::Hermite) {
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
    }
    (nodes, weights)
}
