//! Command-line pipeline over `derivkit`: dataset generation, perturbation,
//! prompt rendering, scoring, statistics, verification and model querying.

pub mod args;
pub mod client;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod mock;

pub use commands::run;
pub use error::{CliError, RecordIssue, RunReport};
