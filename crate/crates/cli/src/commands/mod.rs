//! One function per subcommand; each writes its files under `cfg.out`.

mod checks;
mod figures;

pub use checks::{
    bounds, fpaa, fpaa_instance, fpaa_trial, gadget_check, gadget_deviations, nonvanishing_circuit, protocol,
};
pub use figures::{best_success, decoder_assertions, decoder_curve, fig4, fig6, laa_assertions, laa_curve};

use crate::config::ExperimentConfig;
use crate::report::RunSummary;
use crate::CliError;

/// Dispatches on `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    match cfg.experiment.as_str() {
        "fig4" => fig4(cfg),
        "fig6" => fig6(cfg),
        "fpaa" => fpaa(cfg),
        "gadget-check" => gadget_check(cfg),
        "bounds" => bounds(cfg),
        "protocol" => protocol(cfg),
        other => Err(CliError::Usage(format!("unknown experiment '{other}'"))),
    }
}
