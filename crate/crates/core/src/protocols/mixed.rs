use super::ensemble::qubit_count;
use crate::blockenc::{mixed_postselect_encoding, postselect_encoding, BlockEncoding};
use crate::linalg::{cr, hermitian_eigen, partial_trace, Mat, Operator, Projector, StateVector, Vector};
use crate::protocols::fpaa_prepare;
use crate::qsvt::{apply_sequence, solve_phases, PhaseSequence};
use crate::svtfun::{laa_polynomial, SvtFunction};
use crate::{tol, Error, Result};

/// Largest system dimension for which full-unitary circuits are simulated.
const CIRCUIT_TIER_DIM: usize = 1024;
const PHASE_TOL: f64 = 1e-9;

pub const METRICS_CSV_HEADER: &str = "p_star,f_qsvt,p_qsvt,f_overall,f_uhlmann";

/// Branch probabilities `p_am` of a maximally mixed input on `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSpectrum {
    p_am: Vec<f64>,
    p_m: f64,
}

impl BranchSpectrum {
    pub fn new(p_am: Vec<f64>) -> Result<Self> {
        if p_am.is_empty() {
            return Err(Error::Dimension("empty branch spectrum".into()));
        }
        if p_am.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Domain("branch probabilities must lie in [0, 1]".into()));
        }
        let p_m = p_am.iter().sum::<f64>() / p_am.len() as f64;
        Ok(Self { p_am, p_m })
    }

    pub fn values(&self) -> &[f64] {
        &self.p_am
    }

    pub fn p_m(&self) -> f64 {
        self.p_m
    }

    /// Reference dimension `d_R`.
    pub fn d_r(&self) -> usize {
        self.p_am.len()
    }

    pub fn p_max(&self) -> f64 {
        self.p_am.iter().copied().fold(0.0, f64::max)
    }

    pub fn p_min(&self) -> f64 {
        self.p_am.iter().copied().fold(1.0, f64::min)
    }
}

/// Inputs of a mixed post-selection: `U`, the `A ⊗ B` split with `B` starting
/// in `|0⟩`, and the outcome projector.
#[derive(Debug, Clone)]
pub struct MixedInstance {
    pub prep_unitary: Operator,
    pub partition: (usize, usize),
    pub target: Projector,
}

impl MixedInstance {
    pub fn encoding(&self) -> Result<BlockEncoding> {
        mixed_postselect_encoding(&self.prep_unitary, self.partition, &self.target)
    }

    /// `U (I_A ⊗ |0⟩_B)`, the `d_A` columns that matter.
    pub fn isometry(&self) -> Mat {
        let (da, db) = self.partition;
        let cols: Vec<_> = (0..da).map(|a| self.prep_unitary.mat().column(a * db).into_owned()).collect();
        Mat::from_columns(&cols)
    }

    /// Normalized `(I_R ⊗ Π_m U)|Φ⟩` on `R ⊗ S`, with `|Φ⟩` maximally entangled between `R` and `A`.
    pub fn postselected_state(&self) -> Result<StateVector> {
        let x = self.target.apply_cols(&self.isometry());
        joint_state(&x, self.prep_unitary.row_dims())
    }
}

// Column a of `x` is the S-part paired with |a⟩_R.
fn joint_state(x: &Mat, system_dims: &[usize]) -> Result<StateVector> {
    let (d, da) = x.shape();
    let mut amps = Vector::zeros(d * da);
    for a in 0..da {
        for i in 0..d {
            amps[a * d + i] = x[(i, a)];
        }
    }
    let mut dims = vec![da];
    dims.extend_from_slice(system_dims);
    StateVector::normalized(amps, dims)
}

fn spectrum_of_gram(w: &Mat) -> Result<BranchSpectrum> {
    let gram = w.adjoint() * w;
    let (vals, _) = hermitian_eigen(&gram);
    let mut out = Vec::with_capacity(vals.len());
    for v in vals {
        if !(-tol::PSD_CLAMP..=1.0 + tol::STATISTICAL).contains(&v) {
            return Err(Error::Domain(format!("branch eigenvalue {v:e} outside [0, 1]")));
        }
        // Rank-deficient Gram matrices leave round-off on their null space,
        // which would otherwise leak into Σ √p_am.
        out.push(if v.abs() < tol::PSD_CLAMP { 0.0 } else { v.clamp(0.0, 1.0) });
    }
    BranchSpectrum::new(out)
}

/// Eigenvalues of `p_ab = ⟨ψ_a|Π_m|ψ_b⟩` with `|ψ_a⟩ = U|a⟩|0⟩`.
pub fn branch_spectrum(instance: &MixedInstance) -> Result<BranchSpectrum> {
    branch_spectrum_from_isometry(&instance.isometry(), &instance.target)
}

pub fn branch_spectrum_from_isometry(isometry: &Mat, target: &Projector) -> Result<BranchSpectrum> {
    if isometry.nrows() != target.dim() {
        return Err(Error::Dimension(format!("isometry rows {} vs projector {}", isometry.nrows(), target.dim())));
    }
    spectrum_of_gram(&(target.basis().adjoint() * isometry))
}

/// Same as [`branch_spectrum_from_isometry`] for a computational-basis
/// outcome on qubits, selecting rows instead of forming the projector.
pub fn branch_spectrum_qubits(isometry: &Mat, measured_qubits: &[usize], outcome: &[u8]) -> Result<BranchSpectrum> {
    let n = qubit_count(isometry.nrows())?;
    if measured_qubits.len() != outcome.len() || measured_qubits.iter().any(|&q| q >= n) {
        return Err(Error::Dimension("measured qubits / outcome mismatch".into()));
    }
    let rows: Vec<usize> = (0..isometry.nrows())
        .filter(|&i| measured_qubits.iter().zip(outcome).all(|(&q, &m)| ((i >> (n - 1 - q)) & 1) as u8 == m))
        .collect();
    spectrum_of_gram(&isometry.select_rows(rows.iter()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub f_qsvt: f64,
    pub p_qsvt: f64,
    pub f_overall: f64,
    pub f_uhlmann: f64,
}

impl MetricsReport {
    pub fn csv_row(&self, p_star: f64) -> String {
        format!("{p_star:e},{:.12},{:.12},{:.12},{:.12}", self.f_qsvt, self.p_qsvt, self.f_overall, self.f_uhlmann)
    }
}

/// Fidelity and success probabilities of transforming the branches by `f`.
pub fn metrics(spectrum: &BranchSpectrum, f: &SvtFunction) -> Result<MetricsReport> {
    let values = spectrum.values().iter().map(|p| f.eval(p.sqrt())).collect::<Result<Vec<_>>>()?;
    metrics_from_values(spectrum, &values)
}

/// [`metrics`] with `f(√p_am)` given per branch.
pub fn metrics_from_values(spectrum: &BranchSpectrum, f_values: &[f64]) -> Result<MetricsReport> {
    let p_m = spectrum.p_m();
    if p_m < tol::DEGENERATE {
        return Err(Error::Degenerate(format!("p_m = {p_m:e}")));
    }
    if f_values.len() != spectrum.d_r() {
        return Err(Error::Dimension(format!("{} values for {} branches", f_values.len(), spectrum.d_r())));
    }
    let d = spectrum.d_r() as f64;
    let mut f2 = 0.0;
    let mut cross = 0.0;
    let mut root = 0.0;
    for (&p, &fs) in spectrum.values().iter().zip(f_values) {
        let s = p.sqrt();
        f2 += fs * fs;
        cross += s * fs;
        root += s;
    }
    let p_qsvt = f2 / d;
    let f_qsvt = if p_qsvt > 0.0 { (cross * cross / (d * d * p_m * p_qsvt)).min(1.0) } else { 0.0 };
    let f_uhlmann = (root * root / (d * d * p_m)).min(1.0);
    Ok(MetricsReport { f_qsvt, p_qsvt, f_overall: p_qsvt * f_qsvt, f_uhlmann })
}

#[derive(Debug, Clone)]
pub struct LaaOutcome {
    /// Flag-conditioned state on `R ⊗ S`.
    pub state: StateVector,
    pub flag_probability: f64,
    pub phases: PhaseSequence,
}

/// Circuit-level LAA on the purified mixed input, post-selected on all flags.
pub fn laa_simulate(instance: &MixedInstance, p_star: f64, delta: f64) -> Result<LaaOutcome> {
    check_circuit_tier(instance)?;
    let phases = solve_phases(&laa_polynomial(p_star, delta)?, PHASE_TOL)?;
    laa_simulate_with(instance, &phases)
}

fn check_circuit_tier(instance: &MixedInstance) -> Result<()> {
    let d = instance.prep_unitary.mat().nrows();
    if d > CIRCUIT_TIER_DIM {
        return Err(Error::Resource(format!("circuit tier limited to dimension {CIRCUIT_TIER_DIM}, got {d}")));
    }
    Ok(())
}

pub fn laa_simulate_with(instance: &MixedInstance, phases: &PhaseSequence) -> Result<LaaOutcome> {
    check_circuit_tier(instance)?;
    let block = instance.encoding()?;
    let da = instance.partition.0;
    // R is a spectator: |Φ⟩ = Σ_a |a⟩_R ⊗ |a,0⟩/√d_A, so the circuit acts column by column.
    let x = block.right_projector().basis() * cr(1.0 / (da as f64).sqrt());
    let left = block.left_projector();
    let plus = left.apply_cols(&apply_sequence(&block, phases.phases(), &x));
    let minus = left.apply_cols(&apply_sequence(&block, phases.negated().phases(), &x));
    let out = (plus + minus) * cr(0.5);
    let flag = out.norm_squared();
    if flag < tol::DEGENERATE {
        return Err(Error::Degenerate(format!("flag probability {flag:e}")));
    }
    Ok(LaaOutcome {
        state: joint_state(&out, instance.prep_unitary.row_dims())?,
        flag_probability: flag,
        phases: phases.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct PurifiedOutcome {
    pub state: StateVector,
    /// The output reduced to `S`.
    pub reduced: Operator,
    pub flag_probability: f64,
}

/// FPAA on a purification `V|0⟩ = |Ψ⟩_{RS}`; the first `ref_subsystems`
/// entries of `V`'s dims form `R`, and `target` acts on the rest.
pub fn purified_fpaa(
    purification: &Operator,
    ref_subsystems: usize,
    target: &Projector,
    p_star: f64,
    delta: f64,
) -> Result<PurifiedOutcome> {
    let dims = purification.row_dims();
    if ref_subsystems > dims.len() || target.dims() != &dims[ref_subsystems..] {
        return Err(Error::Dimension(format!("target dims {:?} vs purification dims {dims:?}", target.dims())));
    }
    let full_target = Projector::identity(dims[..ref_subsystems].to_vec()).tensor(target);
    let enc = postselect_encoding(purification, &full_target)?;
    let out = fpaa_prepare(&enc, p_star, delta)?;
    let keep: Vec<usize> = (ref_subsystems..dims.len()).collect();
    let reduced = partial_trace(&out.state.density(), &keep)?;
    Ok(PurifiedOutcome { state: out.state, reduced, flag_probability: out.flag_probability })
}
