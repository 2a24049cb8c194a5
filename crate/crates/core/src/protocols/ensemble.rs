use crate::blockenc::BlockEncoding;
use crate::linalg::{cr, Projector, StateVector};
use crate::qsvt::{run_with_flags, solve_phases, FlagOutcome, PhaseSequence, QsvtRun};
use crate::svtfun::fpaa_polynomial;
use crate::{tol, Error, Result};

/// Certification tolerance used when solving FPAA phases.
const PHASE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EnsembleEntry {
    /// Measured bits, in the order the qubits were listed.
    pub outcome: Vec<u8>,
    pub probability: f64,
    pub projector: Projector,
    pub state: StateVector,
}

/// Post-measurement states of a pure state with their Born probabilities.
#[derive(Debug, Clone)]
pub struct ProjectedEnsemble {
    pub entries: Vec<EnsembleEntry>,
}

impl ProjectedEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }
}

pub(crate) fn qubit_count(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("dimension {dim} is not a qubit register")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Measures `measured_qubits` of `state` in the computational basis.
pub fn project_ensemble(state: &StateVector, measured_qubits: &[usize]) -> Result<ProjectedEnsemble> {
    let n = qubit_count(state.dim())?;
    let k = measured_qubits.len();
    let mut entries = Vec::new();
    for m in 0..1usize << k {
        let outcome: Vec<u8> = (0..k).map(|j| ((m >> (k - 1 - j)) & 1) as u8).collect();
        let projector = Projector::qubit_outcome(n, measured_qubits, &outcome)?;
        let projected = projector.apply(state.amps());
        let p = projected.norm_squared();
        if p <= tol::DEGENERATE {
            continue;
        }
        let post = StateVector::new(projected / cr(p.sqrt()), state.dims().to_vec())?;
        entries.push(EnsembleEntry { outcome, probability: p, projector, state: post });
    }
    Ok(ProjectedEnsemble { entries })
}

/// Phases of the FPAA polynomial for `(p*, δ)`.
pub fn fpaa_phases(p_star: f64, delta: f64) -> Result<PhaseSequence> {
    solve_phases(&fpaa_polynomial(p_star, delta)?, PHASE_TOL)
}

/// Runs FPAA with precomputed phases on the block's `|0…0⟩` input.
pub fn fpaa_prepare_with(encoding: &BlockEncoding, phases: &PhaseSequence) -> Result<FlagOutcome> {
    let right = encoding.right_projector();
    if right.rank() != 1 {
        return Err(Error::Domain(format!("FPAA expects a rank-one input projector, got rank {}", right.rank())));
    }
    let input = StateVector::new(right.basis().column(0).into_owned(), encoding.unitary().row_dims().to_vec())?;
    let run = QsvtRun { block: encoding.clone(), phases: phases.clone(), use_real_part_gadget: true };
    run_with_flags(&run, &input)
}

/// Fixed-point amplitude amplification of a post-selection encoding.
pub fn fpaa_prepare(encoding: &BlockEncoding, p_star: f64, delta: f64) -> Result<FlagOutcome> {
    fpaa_prepare_with(encoding, &fpaa_phases(p_star, delta)?)
}
