//! Post-selection protocols: projected ensembles, FPAA preparation, the
//! post-selection-free estimation loop, and mixed-state post-selection.

mod ensemble;
mod estimation;
mod mixed;

pub use ensemble::{fpaa_phases, fpaa_prepare, fpaa_prepare_with, project_ensemble, EnsembleEntry, ProjectedEnsemble};
pub use estimation::{
    estimate_nonlinear, swap_test_accept_probability, swap_test_purity, EstimationConfig, EstimationResult,
    KCopyEstimator, SwapTestPurity,
};
pub use mixed::{
    branch_spectrum, branch_spectrum_from_isometry, branch_spectrum_qubits, laa_simulate, laa_simulate_with, metrics,
    metrics_from_values, purified_fpaa, BranchSpectrum, LaaOutcome, MetricsReport, MixedInstance, PurifiedOutcome,
    METRICS_CSV_HEADER,
};
