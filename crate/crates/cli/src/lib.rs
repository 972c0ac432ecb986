//! Configuration, experiment runner and report writer for the dampwave
//! solvers.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::{parse_config, parse_with, serialize_config, Overrides, ExperimentConfig, Mode, OutputFormat};
pub use error::HarnessError;
pub use experiment::run_experiment;
pub use report::{write_report, Cell, ExperimentReport};
