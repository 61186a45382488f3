//! Scenario files, parallel experiment runs, CSV/log output and the sweep
//! driver behind the `v2vcc-sim` binary.

pub mod config;
pub mod experiment;
pub mod output;
pub mod sweep;

pub use config::{load_scenario, parse_scenario, ConfigError, Mode, ScenarioConfig};
pub use experiment::{run_experiment, ExperimentError, MetricsTable};
pub use output::{write_outputs, OutputError};
