//! Command-line front end for `evocover`: config-driven experiment tables and
//! thin subcommands over the library.

pub mod cli;
pub mod config;
pub mod experiment;

pub use cli::{run, Cli, CliError};
pub use config::{Config, ConfigError, Overrides};
pub use experiment::{run_experiment, ExperimentReport, TableRow};
