use approx::assert_abs_diff_eq;

use super::*;
use crate::models::{BsParams, MjdParams};
use crate::spanning::{build_gq1, build_gq2, ModifiedWeightConfig, StrikeBand};

fn bs() -> ModelSpec<f64> {
    ModelSpec::Bs(BsParams::new(0.06, 0.0, 0.27, 0.1).unwrap())
}

fn cfg(n_paths: usize, seed: u64) -> SimConfig<f64> {
    SimConfig {
        n_paths,
        seed,
        step: 0.1587 / 40.0,
        horizon: 21.0 * 0.1587 / 40.0,
        spot0: 100.0,
    }
}

#[test]
fn config_validation() {
    assert!(cfg(10, 0).validate().is_ok());
    assert_eq!(cfg(10, 0).n_steps(), 21);
    let mut c = cfg(10, 0);
    c.n_paths = 0;
    assert!(c.validate().is_err());
    let mut c = cfg(10, 0);
    c.horizon = 0.1;
    assert!(c.validate().is_err());
    let mut c = cfg(10, 0);
    c.step = -1.0;
    assert!(c.validate().is_err());
    let mut c = cfg(10, 0);
    c.spot0 = 0.0;
    assert!(c.validate().is_err());
}

#[test]
fn grid_ends_at_horizon() {
    let c = cfg(1, 0);
    let t = c.times();
    assert_eq!(t.len(), 22);
    assert_eq!(t[0], 0.0);
    assert_eq!(*t.last().unwrap(), c.horizon);
}

#[test]
fn paths_start_at_spot_and_stay_positive() {
    let p = simulate_paths(&bs(), &cfg(50, 3)).unwrap();
    assert_eq!(p.n_paths(), 50);
    for row in p.paths() {
        assert_eq!(row[0], 100.0);
        assert!(row.iter().all(|&s| s > 0.0));
    }
}

#[test]
fn zero_volatility_paths_are_deterministic() {
    let m = ModelSpec::Bs(BsParams::new(0.06, 0.02, 1e-12, 0.1).unwrap());
    let p = simulate_paths(&m, &cfg(5, 0)).unwrap();
    for row in p.paths() {
        for (s, t) in row.iter().zip(p.times()) {
            let expected = 100.0 * ((0.1 - 0.02) * t).exp();
            assert!((s / expected - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn poisson_draws_match_mean() {
    let mut rng = stream(7, 0);
    let n = 200_000;
    let total: u32 = (0..n).map(|_| poisson(&mut rng, 0.3)).sum();
    let mean = f64::from(total) / n as f64;
    assert!((mean - 0.3).abs() < 4.0 * (0.3 / n as f64).sqrt());
}

#[test]
fn delta_hedge_starts_at_zero_and_checks_horizon() {
    let m = bs();
    let target = OptionRef::call(100.0, 1.0).unwrap();
    let paths = simulate_paths(&m, &cfg(20, 1)).unwrap();
    let e = delta_hedge_run(&paths, &m, &target).unwrap();
    assert!(e.column(0).iter().all(|&x| x == 0.0));
    let short = OptionRef::call(100.0, 0.05).unwrap();
    assert!(matches!(
        delta_hedge_run(&paths, &m, &short),
        Err(SimulationError::HorizonPastMaturity { .. })
    ));
}

#[test]
fn static_hedge_requires_grid_maturities() {
    let m = bs();
    let target = OptionRef::call(100.0, 1.0).unwrap();
    let c = cfg(10, 1);
    let paths = simulate_paths(&m, &c).unwrap();
    let b1 = StrikeBand::new(0.1587, 80.0, 120.0).unwrap();
    let on_grid = StrikeBand::new(c.horizon, 60.0, 120.0).unwrap();
    let off_grid = StrikeBand::new(0.05, 60.0, 120.0).unwrap();
    let cfg_w = ModifiedWeightConfig::default();
    let good = build_gq2(&m, &target, 100.0, &b1, &on_grid, 5, cfg_w).unwrap();
    let e = static_hedge_run(&paths, &good, &m).unwrap();
    assert!(e.column(0).iter().all(|&x| x == 0.0));
    let bad = build_gq2(&m, &target, 100.0, &b1, &off_grid, 5, cfg_w).unwrap();
    assert!(matches!(
        static_hedge_run(&paths, &bad, &m),
        Err(SimulationError::LegOffGrid { .. })
    ));

    let mut long = cfg(10, 1);
    long.horizon = 42.0 * long.step;
    let long_paths = simulate_paths(&m, &long).unwrap();
    let gq1 = build_gq1(&m, &target, 100.0, &b1, 5).unwrap();
    assert!(matches!(
        static_hedge_run(&long_paths, &gq1, &m),
        Err(SimulationError::HorizonPastLegs { .. })
    ));
}

#[test]
fn matured_legs_pay_intrinsic() {
    // One leg expiring at the horizon: the hedge value there is its payoff
    // plus b0 rolled at r.
    let m = bs();
    let target = OptionRef::call(100.0, 1.0).unwrap();
    let c = cfg(4, 9);
    let paths = simulate_paths(&m, &c).unwrap();
    let b = StrikeBand::new(c.horizon, 90.0, 110.0).unwrap();
    let p = build_gq1(&m, &target, 100.0, &b, 1).unwrap();
    let e = static_hedge_run(&paths, &p, &m).unwrap();
    let t = c.horizon;
    for i in 0..4 {
        let s = *paths.path(i).last().unwrap();
        let leg = &p.legs[0];
        let h = leg.weight * (s - leg.strike).max(0.0) + p.b0 * (0.06 * t).exp();
        let expected = (-0.06 * t).exp() * (h - target.price(&m, s, t).unwrap());
        assert_abs_diff_eq!(e.row(i)[21], expected, epsilon = 1e-12);
    }
}

#[test]
fn put_targets_hedge_too() {
    let m = bs();
    let put = OptionRef::put(100.0, 1.0).unwrap();
    let paths = simulate_paths(&m, &cfg(200, 2)).unwrap();
    let e = delta_hedge_run(&paths, &m, &put).unwrap();
    let s = summarize(&e.terminal()).unwrap();
    assert!(s.rmse < 0.5, "{s:?}");
}

#[test]
fn summarize_constant_sample() {
    let s = summarize(&[-2.5; 7]).unwrap();
    assert_eq!(s.mean, -2.5);
    assert_eq!(s.rmse, 2.5);
    assert_eq!(s.mae, 2.5);
    assert_eq!((s.skewness, s.kurtosis), (0.0, 0.0));
    assert!(s.degenerate);
    assert_eq!((s.min, s.p05, s.p95, s.max), (-2.5, -2.5, -2.5, -2.5));
}

#[test]
fn summarize_two_point_sample() {
    let s = summarize(&[-3.0, 3.0]).unwrap();
    assert_eq!(s.mean, 0.0);
    assert_eq!(s.rmse, 3.0);
    assert_eq!(s.skewness, 0.0);
    assert_eq!(s.kurtosis, -2.0);
    assert!(!s.degenerate);
    assert_abs_diff_eq!(s.p95, 2.7, epsilon = 1e-12);
    assert_abs_diff_eq!(s.p05, -2.7, epsilon = 1e-12);
}

#[test]
fn percentiles_interpolate_linearly() {
    let xs: Vec<f64> = (1..=10).map(f64::from).collect();
    let s = summarize(&xs).unwrap();
    // numpy.percentile(range(1, 11), [5, 95]) == [1.45, 9.55]
    assert_abs_diff_eq!(s.p05, 1.45, epsilon = 1e-12);
    assert_abs_diff_eq!(s.p95, 9.55, epsilon = 1e-12);
    assert_eq!(summarize(&[1.0]).unwrap_err(), SimulationError::TooFewSamples(1));
}

#[test]
fn pfe_curves_bracket_mean() {
    let m = bs();
    let target = OptionRef::call(100.0, 1.0).unwrap();
    let paths = simulate_paths(&m, &cfg(300, 5)).unwrap();
    let e = delta_hedge_run(&paths, &m, &target).unwrap();
    let pfe = pfe_curves(&e, &[95.0, 5.0]).unwrap();
    assert_eq!(pfe.curves.len(), 2);
    assert_eq!((pfe.curves[0][0], pfe.curves[1][0]), (0.0, 0.0));
    for i in 0..pfe.times.len() {
        let col = e.column(i);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        assert!(pfe.curves[1][i] <= mean && mean <= pfe.curves[0][i]);
    }
    assert!(pfe_curves(&e, &[101.0]).is_err());
}

#[test]
fn stats_exports() {
    let rec = StatsRecord {
        method: "GQ2".to_string(),
        time: 0.25,
        stats: summarize(&[1.0, 2.0, 4.0]).unwrap(),
    };
    let mut buf = Vec::new();
    write_stats_csv(std::slice::from_ref(&rec), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("GQ2,0.25,3,"));
    let json = stats_json(std::slice::from_ref(&rec));
    let back: Vec<StatsRecord<f64>> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, vec![rec]);
}

#[test]
fn error_csv_has_one_row_per_path() {
    let m = bs();
    let target = OptionRef::call(100.0, 1.0).unwrap();
    let paths = simulate_paths(&m, &cfg(3, 5)).unwrap();
    let e = delta_hedge_run(&paths, &m, &target).unwrap();
    let mut buf = Vec::new();
    write_error_csv(&e, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("path,0,"));
    assert_eq!(lines[1].split(',').count(), 23);
}

#[test]
fn jump_model_paths_differ_from_diffusion() {
    let jm = ModelSpec::Mjd(MjdParams::new(0.06, 0.0, 0.27, 0.1, 5.0, -0.1, 0.13).unwrap());
    let a = simulate_paths(&bs(), &cfg(20, 4)).unwrap();
    let b = simulate_paths(&jm, &cfg(20, 4)).unwrap();
    assert_ne!(a, b);
}
