//! Config-driven experiment runner built on `muxsec-core`.
//!
//! `run` executes one experiment and writes a CSV table (when the experiment
//! has one) and a `summary.json`. `describe` prints the plan and the outcome
//! spaces a run would enumerate, without computing anything.

pub mod config;
pub mod error;
pub mod plan;
pub mod runner;

pub use config::{load_config, parse_config, ExperimentConfig, Kind};
pub use error::{CliError, CliResult};
pub use plan::{describe, Plan};
pub use runner::{execute, run, Report, RunOutcome};
