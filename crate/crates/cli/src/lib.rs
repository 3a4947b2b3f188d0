//! Configuration, execution and export behind the `fsge` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_run, cmd_sweep, cmd_verify, execute, sweep, RunOutcome, SweepRow, DEFAULT_GAINS};
pub use config::{annotate, parse_config, parse_config_str, Export, RunConfig};
