//! Experiment configuration files.
//!
//! Configs are TOML documents (`.cfg` by convention) with one block per
//! concern: `[model]`, `[target]`, `[[bands]]`, `[[methods]]`, `[sweep]`, and
//! the optional `[quadrature]`, `[simulation]` and `[report]` blocks. See the
//! shipped files under `configs/` for complete examples.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use static_hedge::quadrature::MAX_ORDER;
use static_hedge::simulation::GRID_TOL;
use static_hedge::spanning::MAX_DEPTH;
use static_hedge::{Band, MethodTag, Model, ModifiedWeightConfig, OptionContract, OptionKind, SimConfig};

/// A validation failure, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }

    fn within(self, outer: &str) -> Self {
        Self {
            path: format!("{outer} -> {}", self.path),
            message: self.message,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Free-form label echoed into reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: Model,
    pub target: TargetBlock,
    #[serde(default)]
    pub bands: Vec<BandBlock>,
    #[serde(default)]
    pub methods: Vec<MethodBlock>,
    pub sweep: SweepBlock,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationBlock>,
    #[serde(default)]
    pub report: ReportBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetBlock {
    pub strike: f64,
    pub maturity: f64,
    pub spot: f64,
    #[serde(default = "default_kind")]
    pub kind: OptionKind,
}

fn default_kind() -> OptionKind {
    OptionKind::Call
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandBlock {
    pub maturity: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodBlock {
    pub method: MethodTag,
    /// Quadrature order; shared by every band of a multi-band build.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Per-band orders for GQ2/GQn, overriding `order`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    QuadPoints,
    Band,
    U1,
    U2,
    Lambda,
    MuJ,
    SigmaJ,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::QuadPoints => "quad_points",
            SweepVariable::Band => "band",
            SweepVariable::U1 => "u1",
            SweepVariable::U2 => "u2",
            SweepVariable::Lambda => "lambda",
            SweepVariable::MuJ => "mu_j",
            SweepVariable::SigmaJ => "sigma_j",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sweep point: a number, or `[lo, hi]` pairs for the leading bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Bands(Vec<[f64; 2]>),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Number(x) => write!(f, "{x}"),
            SweepValue::Bands(b) => {
                let parts: Vec<String> = b.iter().map(|[lo, hi]| format!("[{lo};{hi}]")).collect();
                f.write_str(&parts.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub variable: SweepVariable,
    pub values: Vec<SweepValue>,
    /// Re-solve the diffusive volatility so the annualized variance stays
    /// at this level (jump-diffusion only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_variance: Option<f64>,
    /// Optional outer loop, one curve per value (figure configs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesBlock {
    pub variable: SweepVariable,
    pub values: Vec<SweepValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureBlock {
    pub n_inner_gq: usize,
    pub n_laguerre: usize,
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        let d = ModifiedWeightConfig::default();
        Self {
            n_inner_gq: d.n_inner_gq,
            n_laguerre: d.n_laguerre,
        }
    }
}

impl From<QuadratureBlock> for ModifiedWeightConfig {
    fn from(q: QuadratureBlock) -> Self {
        ModifiedWeightConfig {
            n_inner_gq: q.n_inner_gq,
            n_laguerre: q.n_laguerre,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub n_paths: usize,
    /// Rebalancing step `h` in years.
    pub step: f64,
    pub seed: u64,
    /// Defaults to the shortest band maturity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Times at which statistics are reported; defaults to the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub delta_hedge: bool,
    #[serde(default = "default_levels")]
    pub pfe_levels: Vec<f64>,
}

fn yes() -> bool {
    true
}

fn default_levels() -> Vec<f64> {
    vec![95.0, 5.0]
}

/// Sign convention for reported EDL values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdlSign {
    #[default]
    HedgeMinusTarget,
    TargetMinusHedge,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportBlock {
    pub edl_sign: EdlSign,
}

/// A method with its orders fixed for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedMethod {
    pub method: MethodTag,
    /// One order per band the method uses; empty for CW_a.
    pub orders: Vec<usize>,
}

/// The config with one sweep point (and series point) applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub model: Model,
    pub target: OptionContract,
    pub spot: f64,
    pub bands: Vec<Band>,
    pub methods: Vec<ResolvedMethod>,
    pub weights: ModifiedWeightConfig,
    pub simulation: Option<ResolvedSimulation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSimulation {
    pub sim: SimConfig,
    pub checkpoints: Vec<f64>,
    pub delta_hedge: bool,
    pub pfe_levels: Vec<f64>,
}

/// One cell of the series x sweep grid, in output order.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub series: Option<SweepValue>,
    pub value: SweepValue,
    /// Location of this point for error messages.
    pub label: String,
}

impl ExperimentConfig {
    /// Reads, parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        Self::parse(&text).map_err(|e| {
            if e.path.is_empty() {
                ConfigError::new(path.display().to_string(), e.message)
            } else {
                e
            }
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sweep points in output order: series-major, then sweep values.
    pub fn points(&self) -> Vec<Point> {
        let values = |s: &SweepBlock| {
            s.values
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("sweep.values[{i}] ({}={v})", s.variable), v.clone()))
                .collect::<Vec<_>>()
        };
        match &self.sweep.series {
            None => values(&self.sweep)
                .into_iter()
                .map(|(label, value)| Point {
                    series: None,
                    value,
                    label,
                })
                .collect(),
            Some(series) => series
                .values
                .iter()
                .enumerate()
                .flat_map(|(j, s)| {
                    values(&self.sweep).into_iter().map(move |(label, value)| Point {
                        series: Some(s.clone()),
                        value,
                        label: format!("sweep.series.values[{j}] ({}={s}), {label}", series.variable),
                    })
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.methods.is_empty() {
            return Err(ConfigError::new("methods", "at least one method is required"));
        }
        if self.sweep.values.is_empty() {
            return Err(ConfigError::new("sweep.values", "at least one value is required"));
        }
        if let Some(series) = &self.sweep.series {
            if series.values.is_empty() {
                return Err(ConfigError::new("sweep.series.values", "at least one value is required"));
            }
            if series.variable == self.sweep.variable {
                return Err(ConfigError::new("sweep.series.variable", "must differ from sweep.variable"));
            }
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].iter().any(|o| o.method == m.method) {
                return Err(ConfigError::new(
                    format!("methods[{i}].method"),
                    format!("{} is listed twice", m.method),
                ));
            }
        }
        for p in self.points() {
            self.resolve(&p).map_err(|e| e.within(&p.label))?;
        }
        Ok(())
    }

    /// Applies one sweep point and checks everything the run will need.
    pub fn resolve(&self, point: &Point) -> Result<Resolved, ConfigError> {
        let mut model = self.model;
        let mut bands = self.bands.clone();
        let mut quad_override = None;
        if let (Some(series), Some(v)) = (&self.sweep.series, &point.series) {
            apply(series.variable, v, &mut model, &mut bands, &mut quad_override)?;
        }
        apply(self.sweep.variable, &point.value, &mut model, &mut bands, &mut quad_override)?;

        if let Some(v) = self.sweep.hold_variance {
            let Model::Mjd(p) = &mut model else {
                return Err(ConfigError::new("sweep.hold_variance", "requires a jump-diffusion model"));
            };
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::new("sweep.hold_variance", format!("must be positive, got {v}")));
            }
            p.sigma = p.sigma_for_variance(v).ok_or_else(|| {
                ConfigError::new(
                    "sweep.hold_variance",
                    format!(
                        "jump variance {} leaves no room for diffusion at variance {v}",
                        p.lambda * (p.mu_j * p.mu_j + p.sigma_j * p.sigma_j)
                    ),
                )
            })?;
        }
        model.validate().map_err(|e| ConfigError::new("model", e.to_string()))?;

        let t = &self.target;
        for (name, x) in [("strike", t.strike), ("maturity", t.maturity), ("spot", t.spot)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(ConfigError::new(format!("target.{name}"), format!("must be positive, got {x}")));
            }
        }
        let target = OptionContract {
            strike: t.strike,
            maturity: t.maturity,
            kind: t.kind,
        };

        let mut resolved_bands = Vec::with_capacity(bands.len());
        for (i, b) in bands.iter().enumerate() {
            let band = Band::new(b.maturity, b.lo, b.hi).map_err(|e| ConfigError::new(format!("bands[{i}]"), e.to_string()))?;
            let limit = if i == 0 { t.maturity } else { bands[i - 1].maturity };
            if b.maturity >= limit {
                let what = if i == 0 {
                    "the target maturity".to_string()
                } else {
                    format!("bands[{}].maturity", i - 1)
                };
                return Err(ConfigError::new(
                    format!("bands[{i}].maturity"),
                    format!("{} must be strictly shorter than {what} ({limit})", b.maturity),
                ));
            }
            resolved_bands.push(band);
        }

        let mut methods = Vec::with_capacity(self.methods.len());
        for (i, m) in self.methods.iter().enumerate() {
            let path = format!("methods[{i}]");
            let used = match m.method {
                MethodTag::CwA | MethodTag::CwB | MethodTag::Gq1 => 1,
                MethodTag::Gq2 => 2,
                MethodTag::GqN => resolved_bands.len(),
            };
            if resolved_bands.len() < used.max(1) {
                return Err(ConfigError::new(
                    format!("{path}.method"),
                    format!("{} needs {} band(s), config has {}", m.method, used.max(1), resolved_bands.len()),
                ));
            }
            if m.method == MethodTag::GqN && used > MAX_DEPTH {
                return Err(ConfigError::new(
                    "bands",
                    format!("GQn supports at most {MAX_DEPTH} bands, got {used}"),
                ));
            }
            let orders = if m.method == MethodTag::CwA {
                if m.order.is_some() || m.orders.is_some() {
                    return Err(ConfigError::new(format!("{path}.order"), "CW_a chooses its own order"));
                }
                Vec::new()
            } else if let Some(n) = quad_override {
                vec![n; used]
            } else if let Some(list) = &m.orders {
                if matches!(m.method, MethodTag::CwB | MethodTag::Gq1) {
                    return Err(ConfigError::new(
                        format!("{path}.orders"),
                        "per-band orders apply to GQ2 and GQn only",
                    ));
                }
                if list.len() != used {
                    return Err(ConfigError::new(
                        format!("{path}.orders"),
                        format!("expected {used} orders, got {}", list.len()),
                    ));
                }
                list.clone()
            } else if let Some(n) = m.order {
                vec![n; used]
            } else {
                return Err(ConfigError::new(
                    format!("{path}.order"),
                    "required unless the sweep sets quad_points",
                ));
            };
            if let Some(&bad) = orders.iter().find(|&&n| n == 0 || n > MAX_ORDER) {
                return Err(ConfigError::new(
                    format!("{path}.order"),
                    format!("must be in 1..={MAX_ORDER}, got {bad}"),
                ));
            }
            methods.push(ResolvedMethod { method: m.method, orders });
        }

        let q = self.quadrature;
        for (name, n) in [("n_inner_gq", q.n_inner_gq), ("n_laguerre", q.n_laguerre)] {
            if n == 0 || n > MAX_ORDER {
                return Err(ConfigError::new(
                    format!("quadrature.{name}"),
                    format!("must be in 1..={MAX_ORDER}, got {n}"),
                ));
            }
        }

        let simulation = match &self.simulation {
            None => None,
            Some(s) => Some(resolve_simulation(s, &resolved_bands, &target, t.spot)?),
        };

        Ok(Resolved {
            model,
            target,
            spot: t.spot,
            bands: resolved_bands,
            methods,
            weights: q.into(),
            simulation,
        })
    }
}

fn apply(
    var: SweepVariable,
    value: &SweepValue,
    model: &mut Model,
    bands: &mut [BandBlock],
    quad: &mut Option<usize>,
) -> Result<(), ConfigError> {
    let path = var.as_str();
    let number = || match value {
        SweepValue::Number(x) if x.is_finite() => Ok(*x),
        _ => Err(ConfigError::new(path, format!("{var} takes a number, got {value}"))),
    };
    let mjd = |model: &mut Model| -> Result<_, ConfigError> {
        match model {
            Model::Mjd(p) => Ok(*p),
            Model::Bs(_) => Err(ConfigError::new(path, format!("{var} requires a jump-diffusion model"))),
        }
    };
    match var {
        SweepVariable::QuadPoints => {
            let n = number()?;
            if n.fract() != 0.0 || n < 1.0 || n > MAX_ORDER as f64 {
                return Err(ConfigError::new(
                    path,
                    format!("quad_points must be an integer in 1..={MAX_ORDER}, got {n}"),
                ));
            }
            *quad = Some(n as usize);
        }
        SweepVariable::Band => {
            let SweepValue::Bands(pairs) = value else {
                return Err(ConfigError::new(path, format!("band takes a list of [lo, hi] pairs, got {value}")));
            };
            if pairs.is_empty() || pairs.len() > bands.len() {
                return Err(ConfigError::new(
                    path,
                    format!("expected 1..={} [lo, hi] pairs, got {}", bands.len(), pairs.len()),
                ));
            }
            for (b, [lo, hi]) in bands.iter_mut().zip(pairs) {
                b.lo = *lo;
                b.hi = *hi;
            }
        }
        SweepVariable::U1 | SweepVariable::U2 => {
            let i = usize::from(var == SweepVariable::U2);
            let u = number()?;
            let b = bands
                .get_mut(i)
                .ok_or_else(|| ConfigError::new(path, format!("{var} needs at least {} band(s)", i + 1)))?;
            b.maturity = u;
        }
        SweepVariable::Lambda | SweepVariable::MuJ | SweepVariable::SigmaJ => {
            let x = number()?;
            let mut p = mjd(model)?;
            match var {
                SweepVariable::Lambda => p.lambda = x,
                SweepVariable::MuJ => p.mu_j = x,
                _ => p.sigma_j = x,
            }
            *model = Model::Mjd(p);
        }
    }
    Ok(())
}

fn on_grid(t: f64, step: f64) -> bool {
    let r = t / step;
    (r - r.round()).abs() <= GRID_TOL * r.max(1.0)
}

fn resolve_simulation(s: &SimulationBlock, bands: &[Band], target: &OptionContract, spot: f64) -> Result<ResolvedSimulation, ConfigError> {
    let horizon = match s.horizon {
        Some(h) => h,
        None => bands
            .iter()
            .map(|b| b.maturity)
            .reduce(f64::min)
            .ok_or_else(|| ConfigError::new("simulation.horizon", "required when no bands are configured"))?,
    };
    let sim = SimConfig {
        n_paths: s.n_paths,
        seed: s.seed,
        step: s.step,
        horizon,
        spot0: spot,
    };
    sim.validate().map_err(|e| ConfigError::new("simulation", e.to_string()))?;
    if s.n_paths < 2 {
        return Err(ConfigError::new("simulation.n_paths", "statistics need at least 2 paths"));
    }
    if horizon >= target.maturity {
        return Err(ConfigError::new(
            "simulation.horizon",
            format!("{horizon} must be before the target maturity"),
        ));
    }
    if let Some(b) = bands.first() {
        if horizon > b.maturity * (1.0 + GRID_TOL) {
            return Err(ConfigError::new(
                "simulation.horizon",
                format!("{horizon} is past the longest hedge maturity {}", b.maturity),
            ));
        }
    }
    for (i, b) in bands.iter().enumerate() {
        if b.maturity <= horizon * (1.0 + GRID_TOL) && !on_grid(b.maturity, s.step) {
            return Err(ConfigError::new(
                format!("bands[{i}].maturity"),
                format!(
                    "{} expires inside the simulation but is not a multiple of step {}",
                    b.maturity, s.step
                ),
            ));
        }
    }
    let checkpoints = s.checkpoints.clone().unwrap_or_else(|| vec![horizon]);
    if checkpoints.is_empty() {
        return Err(ConfigError::new("simulation.checkpoints", "at least one time is required"));
    }
    for (i, &c) in checkpoints.iter().enumerate() {
        if !(c >= 0.0 && c <= horizon * (1.0 + GRID_TOL)) || !on_grid(c, s.step) {
            return Err(ConfigError::new(
                format!("simulation.checkpoints[{i}]"),
                format!("{c} must be a grid time in [0, {horizon}]"),
            ));
        }
    }
    if let Some((i, l)) = s.pfe_levels.iter().enumerate().find(|(_, l)| !(0.0..=100.0).contains(*l)) {
        return Err(ConfigError::new(
            format!("simulation.pfe_levels[{i}]"),
            format!("must be in [0, 100], got {l}"),
        ));
    }
    Ok(ResolvedSimulation {
        sim,
        checkpoints,
        delta_hedge: s.delta_hedge,
        pfe_levels: s.pfe_levels.clone(),
    })
}
