//! Command-line harness around `collapse-lab-core`.
//!
//! Each subcommand loads states and observables from files or generates them
//! from a seed, runs one campaign, and writes a JSON or CSV report. Exit
//! status: 0 when every check passes, 1 on a check violation, 2 for bad
//! flags, 3 for unreadable or unparsable files, 4 for inputs that parse but
//! are not valid states or observables.

pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{Command, ExperimentConfig, GenSpec};
pub use error::CliError;
pub use report::{emit_report, ExperimentReport, Format};
pub use run::run;
