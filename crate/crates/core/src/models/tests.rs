use super::*;
use crate::quadrature::integrate_bounded;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn bs_base() -> ModelSpec<f64> {
    ModelSpec::Bs(BsParams::new(0.06, 0.0, 0.27, 0.1).unwrap())
}

fn mjd_base() -> ModelSpec<f64> {
    ModelSpec::Mjd(MjdParams::new(0.06, 0.02, 0.14, 0.1, 2.0, -0.1, 0.13).unwrap())
}

fn mjd_params(r: f64, dy: f64, sigma: f64, lambda: f64, mu_j: f64, sigma_j: f64) -> ModelSpec<f64> {
    ModelSpec::Mjd(MjdParams::new(r, dy, sigma, 0.1, lambda, mu_j, sigma_j).unwrap())
}

#[test]
fn target_prices() {
    let bs = call_price(&bs_base(), 100.0, 0.0, 100.0, 1.0).unwrap();
    assert_abs_diff_eq!(bs, 13.5926277, epsilon = 1e-6);
    let mjd = call_price(&mjd_base(), 100.0, 0.0, 100.0, 1.0).unwrap();
    assert_abs_diff_eq!(mjd, 11.9882525, epsilon = 1e-5);
}

#[test]
fn zero_strike_limit_is_forward_stock() {
    let m = ModelSpec::Bs(BsParams::new(0.06, 0.03, 0.27, 0.1).unwrap());
    let c = call_price(&m, 100.0, 0.0, 1e-12, 1.0).unwrap();
    assert_abs_diff_eq!(c, 100.0 * (-0.03f64).exp(), epsilon = 1e-9);
    assert!(put_price(&m, 100.0, 0.0, 1e-12, 1.0).unwrap() < 1e-9);
}

#[test]
fn put_values() {
    let put = put_price(&bs_base(), 100.0, 0.0, 100.0, 1.0).unwrap();
    assert_abs_diff_eq!(put, 7.7690, epsilon = 1e-3);
    let deep = put_price(&bs_base(), 100.0, 0.0, 1e6, 1.0).unwrap();
    let intrinsic = 1e6 * (-0.06f64).exp() - 100.0;
    assert!(((deep - intrinsic) / intrinsic).abs() < 1e-6);
    let opt = OptionRef::put(100.0, 1.0).unwrap();
    assert_eq!(opt.price(&bs_base(), 100.0, 0.0).unwrap(), put);
}

#[test]
fn expiry_and_domain() {
    let m = bs_base();
    assert_eq!(call_price(&m, 110.0, 1.0, 100.0, 1.0).unwrap(), 10.0);
    assert_eq!(call_price(&m, 90.0, 1.0, 100.0, 1.0).unwrap(), 0.0);
    assert!(matches!(
        call_price(&m, 100.0, 1.5, 100.0, 1.0),
        Err(ModelError::PastMaturity { .. })
    ));
    assert!(matches!(
        strike_gamma_weight(&m, 100.0, 1.0, 100.0, 1.0),
        Err(ModelError::PastMaturity { .. })
    ));
    assert!(matches!(
        call_price(&m, -1.0, 0.0, 100.0, 1.0),
        Err(ModelError::NonPositive { name: "spot", .. })
    ));
}

#[test]
fn invalid_params_rejected() {
    assert!(BsParams::new(0.06, 0.0, 0.0, 0.1).is_err());
    assert!(MjdParams::new(0.06, 0.0, 0.2, 0.1, -1.0, 0.0, 0.1).is_err());
    assert!(MjdParams::new(0.06, 0.0, 0.2, 0.1, 1.0, 0.0, 0.0).is_err());
    assert!(BsParams::new(f64::NAN, 0.0, 0.2, 0.1).is_err());
}

#[test]
fn bs_delta_values() {
    let d = delta(&bs_base(), 100.0, 0.0, 100.0, 1.0).unwrap();
    // N(0.3572222...) evaluated independently
    assert_abs_diff_eq!(d, 0.639537274490776, epsilon = 1e-12);
    let m = ModelSpec::Bs(BsParams::new(0.06, 0.04, 0.27, 0.1).unwrap());
    let far = delta(&m, 1e7, 0.0, 100.0, 1.0).unwrap();
    assert_abs_diff_eq!(far, (-0.04f64).exp(), epsilon = 1e-12);
    let far = delta(&mjd_base(), 1e7, 0.0, 100.0, 1.0).unwrap();
    assert_abs_diff_eq!(far, (-0.02f64).exp(), epsilon = 1e-10);
}

#[test]
fn annualized_variance_values() {
    let ModelSpec::Mjd(p) = mjd_base() else { unreachable!() };
    assert_abs_diff_eq!(annualized_variance(&p), 0.0734, epsilon = 1e-15);
    let no_jumps = MjdParams { lambda: 0.0, ..p };
    assert_abs_diff_eq!(annualized_variance(&no_jumps), 0.14 * 0.14, epsilon = 1e-15);
    let one = MjdParams { lambda: 1.0, ..p };
    let sigma = one.sigma_for_variance(0.27 * 0.27).unwrap();
    assert!((sigma - 0.2144).abs() < 1e-4);
    let heavy = MjdParams { lambda: 10.0, ..p };
    assert!(heavy.sigma_for_variance(0.27 * 0.27).is_none());
}

#[test]
fn zero_intensity_mjd_is_black_scholes() {
    let bs = ModelSpec::Bs(BsParams::new(0.05, 0.01, 0.3, 0.1).unwrap());
    let mjd = mjd_params(0.05, 0.01, 0.3, 0.0, -0.2, 0.15);
    for &(x, k, t) in &[(80.0, 100.0, 0.3), (100.0, 100.0, 1.0), (130.0, 90.0, 0.05), (55.0, 120.0, 2.0)] {
        let c0 = call_price(&bs, x, 0.0, k, t).unwrap();
        let c1 = call_price(&mjd, x, 0.0, k, t).unwrap();
        assert_abs_diff_eq!(c0, c1, epsilon = 1e-12);
        let w0 = strike_gamma_weight(&bs, x, 0.0, k, t).unwrap();
        let w1 = strike_gamma_weight(&mjd, x, 0.0, k, t).unwrap();
        assert_abs_diff_eq!(w0, w1, epsilon = 1e-12);
        let d0 = delta(&bs, x, 0.0, k, t).unwrap();
        let d1 = delta(&mjd, x, 0.0, k, t).unwrap();
        assert_abs_diff_eq!(d0, d1, epsilon = 1e-12);
    }
}

#[test]
fn series_truncation_is_converged() {
    let ModelSpec::Mjd(p) = mjd_base() else { unreachable!() };
    for &(s, k, tau) in &[
        (100.0, 100.0, 1.0),
        (80.0, 120.0, 0.8413),
        (100.0, 60.0, 0.0754),
        (150.0, 100.0, 2.0),
    ] {
        let base = mjd::call_with_extra_terms(&p, s, k, tau, 0).unwrap();
        let more = mjd::call_with_extra_terms(&p, s, k, tau, 10).unwrap();
        assert!((base - more).abs() < 1e-12, "{s} {k} {tau}: {base} vs {more}");
    }
}

#[test]
fn weight_integrates_to_discounted_dividend_factor() {
    // int_0^inf gamma(x) dx = [delta]_0^inf = exp(-delta tau); integrate in
    // log-spot over +-14 total standard deviations.
    for model in [bs_base(), ModelSpec::Bs(BsParams::new(0.06, 0.03, 0.2, 0.1).unwrap()), mjd_base()] {
        let (u, k, t) = (0.1587, 100.0f64, 1.0);
        let tau: f64 = t - u;
        let sd = (model.total_variance_rate() * tau).sqrt();
        let centre = k.ln();
        let mut total = 0.0;
        let pieces = 28;
        let (lo, hi) = (centre - 14.0 * sd, centre + 14.0 * sd);
        for i in 0..pieces {
            let a = lo + (hi - lo) * i as f64 / pieces as f64;
            let b = lo + (hi - lo) * (i + 1) as f64 / pieces as f64;
            total += integrate_bounded(|y: f64| strike_gamma_weight(&model, y.exp(), u, k, t).unwrap() * y.exp(), a, b, 40).unwrap();
        }
        let expected = (-model.dividend_yield() * tau).exp();
        assert_abs_diff_eq!(total, expected, epsilon = 1e-8);
    }
}

#[test]
fn weight_is_bell_shaped_near_strike() {
    // Per unit log-strike (x * w) the weight peaks at K exp(-(r - delta + sigma^2/2) tau);
    // per unit strike the 1/x Jacobian pulls the mode down by another sigma^2 tau.
    let m = bs_base();
    let (u, k, t, r, s) = (0.1587, 100.0f64, 1.0, 0.06, 0.27);
    let tau = t - u;
    let xs: Vec<f64> = (1..=40000).map(|i| i as f64 * 0.01).collect();
    let ws: Vec<f64> = xs.iter().map(|&x| x * strike_gamma_weight(&m, x, u, k, t).unwrap()).collect();
    let (imax, _) = ws.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert!((90.0..=110.0).contains(&xs[imax]), "peak at {}", xs[imax]);
    assert!(ws[..=imax].windows(2).all(|p| p[0] <= p[1]));
    assert!(ws[imax..].windows(2).all(|p| p[0] >= p[1]));
    let log_mode = k * (-(r + s * s / 2.0) * tau).exp();
    assert!((xs[imax] - log_mode).abs() < 0.01 * log_mode);

    let raw: Vec<f64> = xs.iter().map(|&x| strike_gamma_weight(&m, x, u, k, t).unwrap()).collect();
    let (jmax, _) = raw.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let mode = k * (-(r + 1.5 * s * s) * tau).exp();
    assert!((xs[jmax] - mode).abs() < 0.02);
}

#[test]
fn f32_pricing_tracks_f64() {
    let m32 = ModelSpec::Bs(BsParams::new(0.06f32, 0.0, 0.27, 0.1).unwrap());
    let c = call_price(&m32, 100.0f32, 0.0, 100.0, 1.0).unwrap();
    assert!((c - 13.592_628).abs() < 1e-4);
}

fn any_model() -> impl Strategy<Value = ModelSpec<f64>> {
    let bs = (0.0..0.1f64, 0.0..0.05f64, 0.1..0.5f64).prop_map(|(r, d, s)| ModelSpec::Bs(BsParams::new(r, d, s, 0.1).unwrap()));
    let mjd = (0.0..0.1f64, 0.0..0.05f64, 0.1..0.4f64, 0.0..3.0f64, -0.2..0.1f64, 0.05..0.25f64)
        .prop_map(|(r, d, s, l, mj, sj)| mjd_params(r, d, s, l, mj, sj));
    prop_oneof![bs, mjd]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn monotone_in_strike_and_spot(
        model in any_model(),
        s in 50.0..150.0f64,
        k in 50.0..150.0f64,
        dk in 0.01..20.0f64,
        t in 0.05..2.0f64,
    ) {
        let c = call_price(&model, s, 0.0, k, t).unwrap();
        prop_assert!(call_price(&model, s, 0.0, k + dk, t).unwrap() <= c + 1e-10);
        prop_assert!(call_price(&model, s + dk, 0.0, k, t).unwrap() >= c - 1e-10);
    }

    #[test]
    fn put_call_parity(model in any_model(), s in 50.0..150.0f64, k in 50.0..150.0f64, t in 0.05..2.0f64) {
        let c = call_price(&model, s, 0.0, k, t).unwrap();
        let p = put_price(&model, s, 0.0, k, t).unwrap();
        let fwd = s * (-model.dividend_yield() * t).exp() - k * (-model.rate() * t).exp();
        prop_assert!((c - p - fwd).abs() < 1e-10);
    }

    #[test]
    fn delta_matches_finite_difference(model in any_model(), s in 50.0..150.0f64, k in 60.0..140.0f64, t in 0.05..2.0f64) {
        let h = 1e-4 * s;
        let fd = (call_price(&model, s + h, 0.0, k, t).unwrap() - call_price(&model, s - h, 0.0, k, t).unwrap()) / (2.0 * h);
        let d = delta(&model, s, 0.0, k, t).unwrap();
        prop_assert!((d - fd).abs() < 1e-6, "delta {} fd {}", d, fd);
        prop_assert!(d > 0.0 && d < 1.0);
    }

    #[test]
    fn weight_matches_second_difference(
        model in any_model(),
        x in 60.0..160.0f64,
        k in 80.0..120.0f64,
        u in 0.0..0.5f64,
        gap in 0.1..1.0f64,
    ) {
        let t = u + gap;
        let h = 1e-3 * x;
        let c = |y: f64| call_price(&model, y, u, k, t).unwrap();
        let fd = (c(x + h) - 2.0 * c(x) + c(x - h)) / (h * h);
        let w = strike_gamma_weight(&model, x, u, k, t).unwrap();
        prop_assert!(w >= 0.0);
        prop_assert!((w - fd).abs() < 1e-5, "weight {} fd {}", w, fd);
    }
}
