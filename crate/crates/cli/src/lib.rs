//! Configuration, experiment runner and CSV layouts for the `spm` binary.

pub mod config;
pub mod run;
pub mod schema;

pub use config::{ConfigError, Experiment, RunConfig};
pub use run::{run_experiment, RunError, RunReport};
