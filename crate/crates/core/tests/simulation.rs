use static_hedge::simulation::{delta_hedge_run, simulate_paths, static_hedge_run, summarize};
use static_hedge::spanning::{build_gq2, ModifiedWeightConfig};
use static_hedge::{Band, BsParams, MjdParams, Model, OptionContract, SimConfig};

fn bs(sigma: f64) -> Model {
    Model::Bs(BsParams::new(0.06, 0.02, sigma, 0.1).unwrap())
}

fn mjd(lambda: f64) -> Model {
    Model::Mjd(MjdParams::new(0.06, 0.02, 0.14, 0.1, lambda, -0.1, 0.13).unwrap())
}

fn cfg(n_paths: usize, seed: u64, step: f64, steps: usize) -> SimConfig {
    SimConfig {
        n_paths,
        seed,
        step,
        horizon: steps as f64 * step,
        spot0: 100.0,
    }
}

fn target() -> OptionContract {
    OptionContract::call(100.0, 1.0).unwrap()
}

#[test]
fn same_seed_same_paths() {
    let c = cfg(100, 42, 0.01, 10);
    assert_eq!(simulate_paths(&mjd(2.0), &c).unwrap(), simulate_paths(&mjd(2.0), &c).unwrap());
    let other = SimConfig { seed: 43, ..c };
    assert_ne!(simulate_paths(&mjd(2.0), &c).unwrap(), simulate_paths(&mjd(2.0), &other).unwrap());
}

#[test]
fn paths_do_not_depend_on_path_count() {
    let small = simulate_paths(&mjd(2.0), &cfg(10, 5, 0.01, 10)).unwrap();
    let large = simulate_paths(&mjd(2.0), &cfg(40, 5, 0.01, 10)).unwrap();
    for p in 0..10 {
        assert_eq!(small.path(p), large.path(p));
    }
}

#[test]
fn no_jumps_reproduces_diffusion_paths() {
    let c = cfg(50, 9, 0.004, 21);
    let a = simulate_paths(&mjd(0.0), &c).unwrap();
    let b = simulate_paths(&Model::Bs(BsParams::new(0.06, 0.02, 0.14, 0.1).unwrap()), &c).unwrap();
    assert_eq!(a, b);
}

#[test]
fn terminal_mean_grows_at_real_world_drift() {
    // E[S_T / S_0] = exp((mu - delta) T) for both models.
    let t = 0.5;
    for m in [bs(0.27), mjd(2.0)] {
        let paths = simulate_paths(&m, &cfg(100_000, 17, t / 5.0, 5)).unwrap();
        let ratios: Vec<f64> = paths.paths().map(|p| p[5] / 100.0).collect();
        let n = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / n;
        let var = ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expected = ((0.1 - 0.02) * t).exp();
        assert!((mean - expected).abs() < 3.0 * (var / n).sqrt(), "{m:?}: {mean} vs {expected}");
    }
}

#[test]
fn log_returns_have_normal_moments() {
    let m = Model::Bs(BsParams::new(0.0, 0.0, 1.0, 0.5).unwrap());
    let paths = simulate_paths(&m, &cfg(100_000, 3, 1.0, 1)).unwrap();
    let z: Vec<f64> = paths.paths().map(|p| (p[1] / p[0]).ln()).collect();
    let s = summarize(&z).unwrap();
    assert!(s.skewness.abs() < 0.03, "{s:?}");
    assert!(s.kurtosis.abs() < 0.06, "{s:?}");
}

#[test]
fn frequent_rebalancing_drives_delta_hedge_error_down() {
    // Discrete-hedging error scales like sqrt(h): going from h = 4e-3 to
    // h = 1e-4 should shrink the RMSE by about sqrt(40).
    let m = Model::Bs(BsParams::new(0.06, 0.0, 0.27, 0.1).unwrap());
    let rmse = |h: f64, steps: usize| {
        let paths = simulate_paths(&m, &cfg(200, 8, h, steps)).unwrap();
        summarize(&delta_hedge_run(&paths, &m, &target()).unwrap().terminal()).unwrap().rmse
    };
    let coarse = rmse(0.0833 / 21.0, 21);
    let fine = rmse(0.0833 / 833.0, 833);
    let ratio = coarse / fine;
    assert!(fine < 0.025, "fine RMSE {fine}");
    assert!((ratio / 40f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn doubling_paths_keeps_rmse_within_bootstrap_error() {
    let m = mjd(2.0);
    let p = build_gq2(
        &m,
        &target(),
        100.0,
        &Band::new(0.1587, 80.0, 120.0).unwrap(),
        &Band::new(0.0833, 60.0, 120.0).unwrap(),
        10,
        ModifiedWeightConfig::default(),
    )
    .unwrap();
    let run = |n: usize| {
        let paths = simulate_paths(&m, &cfg(n, 21, 0.0833 / 21.0, 21)).unwrap();
        static_hedge_run(&paths, &p, &m).unwrap().terminal()
    };
    let small = run(1000);
    let large = run(2000);
    let rmse = |x: &[f64]| summarize(x).unwrap().rmse;

    // Bootstrap standard error of the RMSE of the smaller sample, resampled
    // with a fixed linear congruential index stream.
    let mut state: u64 = 12345;
    let mut boot = Vec::new();
    for _ in 0..200 {
        let resample: Vec<f64> = (0..small.len())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                small[(state >> 33) as usize % small.len()]
            })
            .collect();
        boot.push(rmse(&resample));
    }
    let mean = boot.iter().sum::<f64>() / boot.len() as f64;
    let se = (boot.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt();
    assert!(
        (rmse(&small) - rmse(&large)).abs() < 3.0 * se,
        "{} vs {} (se {se})",
        rmse(&small),
        rmse(&large)
    );
}

#[test]
fn stats_invariants_hold_on_hedge_errors() {
    let m = mjd(2.0);
    let paths = simulate_paths(&m, &cfg(500, 4, 0.0833 / 21.0, 21)).unwrap();
    let e = delta_hedge_run(&paths, &m, &target()).unwrap();
    for i in 1..e.times().len() {
        let s = summarize(&e.column(i)).unwrap();
        assert!(s.min <= s.p05 && s.p05 <= s.p95 && s.p95 <= s.max);
        assert!(s.p05 <= s.mean && s.mean <= s.p95);
        assert!(s.rmse + 1e-15 >= s.mean.abs());
        assert!(s.mae <= s.rmse + 1e-15);
    }
}
