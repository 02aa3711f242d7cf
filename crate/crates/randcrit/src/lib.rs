//! Parallel drivers, artifact formats and the experiment runner behind the
//! `randcrit` command-line tool.
//!
//! Results never depend on the number of threads: Monte Carlo loops and
//! lattice scans are cut into fixed work items and merged in index order.

pub mod artifacts;
pub mod config;
pub mod drivers;
pub mod error;
pub mod run;

pub use config::{CommandKind, ExperimentConfig};
pub use error::CliError;
pub use run::{run, RunOptions, RunOutcome};
