//! Command-line driver for `weakkam-core`: configuration parsing, subcommand
//! dispatch, CSV/JSON output and the convergence table.

pub mod commands;
pub mod config;
pub mod convergence;
pub mod error;
pub mod output;

pub use commands::{run, Cli, Command};
pub use config::{parse_config, RunConfig};
pub use convergence::{run_convergence, ConvergenceReport, ConvergenceRow};
pub use error::{CliError, CliResult};
