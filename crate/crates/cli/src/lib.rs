//! Config-driven experiment runner for the `static_hedge` library.
//!
//! A config names a model, a target option, strike bands, hedging methods
//! and one swept variable; [`run_experiment`] evaluates every sweep point in
//! parallel and returns rows in config order.

pub mod config;
pub mod emit;
pub mod report;

pub use config::{ConfigError, ExperimentConfig, SweepValue, SweepVariable};
pub use emit::{render, render_pfe, Format};
pub use report::{run_build, run_experiment, run_pfe, run_price, run_simulation, PfeReport, Report, ReportRow, RunError};

/// Process exit code for a run error.
pub fn exit_code(e: &RunError) -> i32 {
    match e {
        RunError::Config(_) => 2,
        RunError::Numerical { .. } => 3,
    }
}
