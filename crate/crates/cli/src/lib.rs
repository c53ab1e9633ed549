//! Library half of the `qherm` command-line tool: scenario configuration,
//! the built-in systems, time sweeps and report generation.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod scenario;
pub mod systems;

pub use config::{ScenarioConfig, ScenarioName, TimeGrid};
pub use error::{CliError, CliResult};
pub use scenario::{run_scenario, RunOutput, ScenarioReport, TrajectoryRow};
