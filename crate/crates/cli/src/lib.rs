//! Experiment drivers for the peridynamic Sine-Gordon solvers: configuration
//! files, the `run` / `validate` / `converge` / `energy` / `dispersive`
//! commands, and their data and plot output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod plot;

pub use config::RunConfig;
pub use error::CliError;
