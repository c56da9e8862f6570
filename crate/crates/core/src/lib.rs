//! Static hedging of European options with portfolios of shorter-dated calls.
//!
//! The numerical core is generic over the floating-point scalar (see
//! [`scalar::Real`]); the aliases below fix it to `f64`, which is what the
//! command-line runner and the reference checks use.
//!
//! ```
//! use static_hedge::{models, spanning, Model, OptionContract, Band};
//!
//! let model = Model::Bs(models::BsParams::new(0.06, 0.0, 0.27, 0.1).unwrap());
//! let target = OptionContract::call(100.0, 1.0).unwrap();
//! let band = Band::new(0.1587, 0.0, 130.0).unwrap();
//! let hedge = spanning::build_gq1(&model, &target, 100.0, &band, 25).unwrap();
//! assert!(hedge.edl().abs() < 1e-3);
//! ```

pub mod models;
pub mod quadrature;
pub mod scalar;
pub mod simulation;
pub mod spanning;

pub use models::{ModelError, OptionKind};
pub use quadrature::{QuadratureError, RuleKind};
pub use scalar::Real;
pub use simulation::SimulationError;
pub use spanning::{MethodTag, ModifiedWeightConfig, SpanningError};

/// Crate version, recorded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Rule = quadrature::QuadratureRule<f64>;
pub type Model = models::ModelSpec<f64>;
pub type BsParams = models::BsParams<f64>;
pub type MjdParams = models::MjdParams<f64>;
pub type OptionContract = models::OptionRef<f64>;
pub type Band = spanning::StrikeBand<f64>;
pub type Leg = spanning::HedgeLeg<f64>;
pub type Portfolio = spanning::HedgePortfolio<f64>;
pub type SimConfig = simulation::SimConfig<f64>;
pub type PathSet = simulation::PathSet<f64>;
pub type ErrorMatrix = simulation::ErrorMatrix<f64>;
pub type Stats = simulation::HedgeErrorStats<f64>;
