//! Running configs and the report types they produce.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use static_hedge::models::{self, MJD_MAX_TERMS, MJD_MIN_TERMS, MJD_TAIL_PROB};
use static_hedge::quadrature::{MAX_LAGUERRE_ORDER, MAX_ORDER};
use static_hedge::simulation::{self, GRID_TOL, MAX_JUMPS_PER_STEP};
use static_hedge::spanning::{self, MAX_DEPTH, MIN_MATURITY_GAP};
use static_hedge::{ErrorMatrix, MethodTag, ModifiedWeightConfig, Portfolio, Stats};

use crate::config::{ConfigError, EdlSign, ExperimentConfig, Point, Resolved, ResolvedMethod, SweepValue, SweepVariable};

/// Why a run stopped.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure at {at}: {message}")]
    Numerical { at: String, message: String },
}

impl RunError {
    fn numerical(point: &Point, what: &str, e: impl std::fmt::Display) -> Self {
        RunError::Numerical {
            at: point.label.clone(),
            message: format!("{what}: {e}"),
        }
    }
}

/// What produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Price,
    Sweep,
    Simulate,
    Pfe,
}

/// Library constants that influence the numbers, echoed for auditability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defaults {
    pub modified_weight: ModifiedWeightConfig,
    pub max_legendre_order: usize,
    pub max_laguerre_order: usize,
    pub mjd_min_terms: usize,
    pub mjd_tail_prob: f64,
    pub mjd_max_terms: usize,
    pub min_maturity_gap: f64,
    pub max_band_depth: usize,
    pub grid_tol: f64,
    pub max_jumps_per_step: u32,
    pub percentile_rule: String,
    pub edl_sign: EdlSign,
}

impl Defaults {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            modified_weight: cfg.quadrature.into(),
            max_legendre_order: MAX_ORDER,
            max_laguerre_order: MAX_LAGUERRE_ORDER,
            mjd_min_terms: MJD_MIN_TERMS,
            mjd_tail_prob: MJD_TAIL_PROB,
            mjd_max_terms: MJD_MAX_TERMS,
            min_maturity_gap: MIN_MATURITY_GAP,
            max_band_depth: MAX_DEPTH,
            grid_tol: GRID_TOL,
            max_jumps_per_step: MAX_JUMPS_PER_STEP,
            percentile_rule: "linear interpolation between order statistics".into(),
            edl_sign: cfg.report.edl_sign,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: Command,
    pub cli_version: String,
    pub core_version: String,
    pub defaults: Defaults,
    /// The config as run, after any command-line overrides.
    pub config: ExperimentConfig,
}

/// Statistics of one method's discounted errors at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub time: f64,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    /// Method tag, or `DH` for the delta hedge.
    pub method: String,
    /// Quadrature order per band; empty for the delta hedge.
    pub orders: Vec<usize>,
    /// Legs actually held (CW_b drops legs outside its band).
    pub legs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edl: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<Checkpoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SweepValue>,
    pub value: SweepValue,
    pub target_value: f64,
    pub target_delta: f64,
    pub methods: Vec<MethodResult>,
    /// Percentage drop in |EDL| from GQ1 to GQ2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: Metadata,
    pub series_variable: Option<SweepVariable>,
    pub variable: SweepVariable,
    pub rows: Vec<ReportRow>,
}

/// Potential future exposure curves for every method at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfeRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SweepValue>,
    pub value: SweepValue,
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    pub methods: Vec<PfeMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfeMethod {
    pub method: String,
    /// One curve per level, aligned with `PfeRow::times`.
    pub curves: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfeReport {
    pub metadata: Metadata,
    pub series_variable: Option<SweepVariable>,
    pub variable: SweepVariable,
    pub rows: Vec<PfeRow>,
}

fn metadata(cfg: &ExperimentConfig, command: Command) -> Metadata {
    Metadata {
        command,
        cli_version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: static_hedge::VERSION.to_string(),
        defaults: Defaults::new(cfg),
        config: cfg.clone(),
    }
}

/// Builds one method's portfolio.
pub fn build_method(r: &Resolved, m: &ResolvedMethod) -> Result<Portfolio, spanning::SpanningError> {
    let (model, target, s, b) = (&r.model, &r.target, r.spot, &r.bands);
    let built = match m.method {
        MethodTag::CwA => spanning::build_cw_a(model, target, s, &b[0]),
        MethodTag::CwB => spanning::build_cw_b(model, target, s, &b[0], m.orders[0]),
        MethodTag::Gq1 => spanning::build_gq1(model, target, s, &b[0], m.orders[0]),
        MethodTag::Gq2 => spanning::build_gq_n_with_orders(model, target, s, &b[..2], &m.orders, r.weights),
        MethodTag::GqN => spanning::build_gq_n_with_orders(model, target, s, b, &m.orders, r.weights),
    };
    // The multi-band builder tags its output GQn; keep the configured name.
    built.map(|mut p| {
        p.method = m.method;
        p
    })
}

fn signed(cfg: &ExperimentConfig, edl: f64) -> f64 {
    match cfg.report.edl_sign {
        EdlSign::HedgeMinusTarget => edl,
        EdlSign::TargetMinusHedge => -edl,
    }
}

fn orders_of(p: &Portfolio, m: &ResolvedMethod) -> Vec<usize> {
    if m.orders.is_empty() {
        vec![p.order]
    } else {
        m.orders.clone()
    }
}

fn pdl_of(methods: &[MethodResult]) -> Option<f64> {
    let find = |tag: MethodTag| methods.iter().find(|m| m.method == tag.as_str()).and_then(|m| m.edl);
    let (a, b) = (find(MethodTag::Gq1)?, find(MethodTag::Gq2)?);
    spanning::pdl(a, b).ok()
}

struct Priced {
    resolved: Resolved,
    value: f64,
    delta: f64,
}

fn price_point(cfg: &ExperimentConfig, point: &Point) -> Result<Priced, RunError> {
    let resolved = cfg.resolve(point)?;
    let t = &resolved.target;
    let value = t
        .price(&resolved.model, resolved.spot, 0.0)
        .map_err(|e| RunError::numerical(point, "target price", e))?;
    let call_delta = models::delta(&resolved.model, resolved.spot, 0.0, t.strike, t.maturity)
        .map_err(|e| RunError::numerical(point, "target delta", e))?;
    let delta = match t.kind {
        static_hedge::OptionKind::Call => call_delta,
        static_hedge::OptionKind::Put => call_delta - (-resolved.model.dividend_yield() * t.maturity).exp(),
    };
    Ok(Priced { resolved, value, delta })
}

fn run_points<R: Send>(cfg: &ExperimentConfig, f: impl Fn(&Point) -> Result<R, RunError> + Sync) -> Result<Vec<R>, RunError> {
    let points = cfg.points();
    let results: Vec<Result<R, RunError>> = points.par_iter().map(&f).collect();
    // First failure in config order, independent of scheduling.
    results.into_iter().collect()
}

/// Target price and delta at every sweep point.
pub fn run_price(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let rows = run_points(cfg, |p| {
        let priced = price_point(cfg, p)?;
        Ok(ReportRow {
            series: p.series.clone(),
            value: p.value.clone(),
            target_value: priced.value,
            target_delta: priced.delta,
            methods: Vec::new(),
            pdl: None,
        })
    })?;
    Ok(report(cfg, Command::Price, rows))
}

fn report(cfg: &ExperimentConfig, command: Command, rows: Vec<ReportRow>) -> Report {
    Report {
        metadata: metadata(cfg, command),
        series_variable: cfg.sweep.series.as_ref().map(|s| s.variable),
        variable: cfg.sweep.variable,
        rows,
    }
}

/// Expected discounted loss of every configured method at every sweep point.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let rows = run_points(cfg, |p| {
        let priced = price_point(cfg, p)?;
        let mut methods = Vec::new();
        for m in &priced.resolved.methods {
            let portfolio = build_method(&priced.resolved, m).map_err(|e| RunError::numerical(p, m.method.as_str(), e))?;
            methods.push(MethodResult {
                method: m.method.to_string(),
                orders: orders_of(&portfolio, m),
                legs: portfolio.legs.len(),
                edl: Some(portfolio.edl()),
                checkpoints: Vec::new(),
            });
        }
        for m in &mut methods {
            m.edl = m.edl.map(|e| signed(cfg, e));
        }
        // PDL compares magnitudes, so the sign convention does not matter.
        let pdl = pdl_of(&methods);
        Ok(ReportRow {
            series: p.series.clone(),
            value: p.value.clone(),
            target_value: priced.value,
            target_delta: priced.delta,
            methods,
            pdl,
        })
    })?;
    Ok(report(cfg, Command::Sweep, rows))
}

struct HedgeRun {
    method: String,
    orders: Vec<usize>,
    legs: usize,
    edl: Option<f64>,
    errors: ErrorMatrix,
}

/// Error matrices for the delta hedge (if enabled) and every static method.
fn simulate_point(cfg: &ExperimentConfig, p: &Point) -> Result<(Priced, Vec<HedgeRun>), RunError> {
    let priced = price_point(cfg, p)?;
    let r = &priced.resolved;
    let sim = r
        .simulation
        .as_ref()
        .ok_or_else(|| ConfigError::new("simulation", "this command needs a [simulation] block"))?;
    let paths = simulation::simulate_paths(&r.model, &sim.sim).map_err(|e| RunError::numerical(p, "paths", e))?;
    let mut out = Vec::new();
    if sim.delta_hedge {
        let e = simulation::delta_hedge_run(&paths, &r.model, &r.target).map_err(|e| RunError::numerical(p, "DH", e))?;
        out.push(HedgeRun {
            method: "DH".into(),
            orders: Vec::new(),
            legs: 0,
            edl: None,
            errors: e,
        });
    }
    for m in &r.methods {
        let name = m.method.as_str();
        let portfolio = build_method(r, m).map_err(|e| RunError::numerical(p, name, e))?;
        let e = simulation::static_hedge_run(&paths, &portfolio, &r.model).map_err(|e| RunError::numerical(p, name, e))?;
        out.push(HedgeRun {
            method: name.into(),
            orders: orders_of(&portfolio, m),
            legs: portfolio.legs.len(),
            edl: Some(signed(cfg, portfolio.edl())),
            errors: e,
        });
    }
    Ok((priced, out))
}

/// Monte Carlo hedge-error statistics at the configured checkpoints.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let rows = run_points(cfg, |p| {
        let (priced, runs) = simulate_point(cfg, p)?;
        let checkpoints = &priced.resolved.simulation.as_ref().expect("checked by simulate_point").checkpoints;
        let mut methods = Vec::new();
        for HedgeRun {
            method,
            orders,
            legs,
            edl,
            errors,
        } in runs
        {
            let mut cps = Vec::new();
            for &t in checkpoints {
                let i = errors.index_of(t).expect("checkpoints are validated grid times");
                let stats = simulation::summarize(&errors.column(i)).map_err(|e| RunError::numerical(p, &method, e))?;
                cps.push(Checkpoint { time: t, stats });
            }
            methods.push(MethodResult {
                method,
                orders,
                legs,
                edl,
                checkpoints: cps,
            });
        }
        let pdl = pdl_of(&methods);
        Ok(ReportRow {
            series: p.series.clone(),
            value: p.value.clone(),
            target_value: priced.value,
            target_delta: priced.delta,
            methods,
            pdl,
        })
    })?;
    Ok(report(cfg, Command::Simulate, rows))
}

/// Percentile envelopes of the discounted hedge errors over the whole grid.
pub fn run_pfe(cfg: &ExperimentConfig) -> Result<PfeReport, RunError> {
    let rows = run_points(cfg, |p| {
        let (priced, runs) = simulate_point(cfg, p)?;
        let levels = priced
            .resolved
            .simulation
            .as_ref()
            .expect("checked by simulate_point")
            .pfe_levels
            .clone();
        let mut times = Vec::new();
        let mut methods = Vec::new();
        for HedgeRun { method, errors, .. } in runs {
            let pfe = simulation::pfe_curves(&errors, &levels).map_err(|e| RunError::numerical(p, &method, e))?;
            times = pfe.times;
            methods.push(PfeMethod {
                method,
                curves: pfe.curves,
            });
        }
        Ok(PfeRow {
            series: p.series.clone(),
            value: p.value.clone(),
            times,
            levels,
            methods,
        })
    })?;
    Ok(PfeReport {
        metadata: metadata(cfg, Command::Pfe),
        series_variable: cfg.sweep.series.as_ref().map(|s| s.variable),
        variable: cfg.sweep.variable,
        rows,
    })
}

/// Portfolios of every method at the first sweep point.
pub fn run_build(cfg: &ExperimentConfig) -> Result<Vec<Portfolio>, RunError> {
    let point = cfg
        .points()
        .into_iter()
        .next()
        .ok_or_else(|| ConfigError::new("sweep.values", "empty"))?;
    let r = cfg.resolve(&point)?;
    r.methods
        .iter()
        .map(|m| build_method(&r, m).map_err(|e| RunError::numerical(&point, m.method.as_str(), e)))
        .collect()
}
