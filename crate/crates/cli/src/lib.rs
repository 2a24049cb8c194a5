//! Experiment drivers behind the `postsel` command line: figure
//! reproductions, gadget and FPAA checks, and the bounds suite.

pub mod commands;
pub mod config;
mod plot;
pub mod report;
pub mod spectra;

pub use config::{build_config, parse_config, ExperimentConfig, Preset, SpectrumSource};
pub use report::{Assertion, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] postsel::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("plot: {0}")]
    Plot(String),
}
