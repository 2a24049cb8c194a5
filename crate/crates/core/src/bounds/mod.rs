//! Numerical checks of the amplitude-amplification lower bound, the
//! multiplicative-error fidelity bounds, the Uhlmann bounds and the
//! success-probability tail bounds.

mod suite;
mod tail;

pub use suite::{default_suite, random_spectrum, two_branch_instance, SuiteConfig, BOUNDS_CSV_HEADER};
pub use tail::{
    aqec_bound_check, max_alpha, multiplicative_error_fidelity_check, tail_bound_check, worst_case_perturbation,
};

use crate::linalg::{
    c, complete_unitary, cr, fidelity, haar_unitary, identity, Mat, Operator, Projector, Rng, StateVector,
};
use crate::protocols::{branch_spectrum, MixedInstance};
use crate::{tol, Error, Result};

/// Slack allowed when comparing a measured value to its bound.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `measured ≥ bound`.
    Lower,
    /// `measured ≤ bound`.
    Upper,
}

/// Which task's fidelity formula a check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Mixed,
    Teleport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckResult {
    pub name: String,
    pub bound_value: f64,
    pub measured_value: f64,
    pub kind: BoundKind,
    pub satisfied: bool,
    /// Distance to the bound on the allowed side; negative when violated.
    pub margin: f64,
    /// Parameters the bound depends on (`ε`, `ε'`, `α`, `δ`, ...).
    pub parameters: Vec<(&'static str, f64)>,
}

impl BoundCheckResult {
    pub fn new(name: impl Into<String>, kind: BoundKind, bound_value: f64, measured_value: f64) -> Self {
        let margin = match kind {
            BoundKind::Lower => measured_value - bound_value,
            BoundKind::Upper => bound_value - measured_value,
        };
        Self {
            name: name.into(),
            bound_value,
            measured_value,
            kind,
            satisfied: margin >= -BOUND_SLACK,
            margin,
            parameters: Vec::new(),
        }
    }

    pub fn with(mut self, key: &'static str, value: f64) -> Self {
        self.parameters.push((key, value));
        self
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.12e},{:.12e},{:.3e},{}",
            self.name, self.bound_value, self.measured_value, self.margin, self.satisfied
        )
    }
}

/// `E[Π]` over projectors with `⟨ψ|Π|ψ⟩ = p_m` and rank `d_m`, averaged
/// over `U(1) ⊕ U(D−1)` conjugation fixing `|ψ⟩`:
/// `(d_m − p_m)/(D−1) I + (D p_m − d_m)/(D−1) |ψ⟩⟨ψ|`.
pub fn average_projector(psi: &StateVector, p_m: f64, d_m: usize) -> Result<Operator> {
    let d = psi.dim();
    if d < 2 {
        return Err(Error::Domain("average projector needs D >= 2".into()));
    }
    if !(0.0..=1.0).contains(&p_m) || d_m == 0 || d_m >= d {
        return Err(Error::Domain(format!(
            "need 0 <= p_m <= 1 and 1 <= d_m < D, got p_m = {p_m}, d_m = {d_m}, D = {d}"
        )));
    }
    let (dm, dd) = (d_m as f64, d as f64);
    let v = psi.amps();
    let mat = identity(d) * cr((dm - p_m) / (dd - 1.0)) + (v * v.adjoint()) * cr((dd * p_m - dm) / (dd - 1.0));
    Operator::square(mat, psi.dims().to_vec())
}

/// A rank-`d_m` projector with `⟨ψ|Π|ψ⟩ = p_m`, in a random basis of `ψ^⊥`.
pub fn projector_with_overlap(psi: &StateVector, p_m: f64, d_m: usize, rng: &mut Rng) -> Result<Projector> {
    let d = psi.dim();
    if !(0.0..=1.0).contains(&p_m) || d_m == 0 || d_m >= d {
        return Err(Error::Domain(format!("need 0 <= p_m <= 1 and 1 <= d_m < D, got p_m = {p_m}, d_m = {d_m}")));
    }
    // Columns: ψ first, then a random orthonormal completion.
    let frame = complete_unitary(&Mat::from_column_slice(d, 1, psi.amps().as_slice()), rng)?;
    let mut basis = Mat::zeros(d, d_m);
    let lead = frame.column(0) * cr(p_m.sqrt()) + frame.column(1) * cr((1.0 - p_m).sqrt());
    basis.set_column(0, &lead);
    for k in 1..d_m {
        basis.set_column(k, &frame.column(k + 1));
    }
    Projector::from_basis(basis, psi.dims().to_vec())
}

/// Monte Carlo estimate of [`average_projector`]: conjugates `projector` by
/// `samples` Haar draws from `U(1) ⊕ U(D−1)` in a frame whose first vector is `ψ`.
pub fn average_projector_monte_carlo(
    psi: &StateVector,
    projector: &Projector,
    samples: usize,
    rng: &mut Rng,
) -> Result<Operator> {
    let d = psi.dim();
    if projector.dim() != d || d < 2 || samples == 0 {
        return Err(Error::Dimension(format!("projector on {} vs state on {d}, {samples} samples", projector.dim())));
    }
    let frame = complete_unitary(&Mat::from_column_slice(d, 1, psi.amps().as_slice()), rng)?;
    let local = frame.adjoint() * projector.basis();
    let mut acc = Mat::zeros(d, d);
    for _ in 0..samples {
        let theta: f64 = rand::Rng::gen_range(rng, 0.0..std::f64::consts::TAU);
        let rest = haar_unitary(d - 1, rng);
        let mut g = Mat::zeros(d, d);
        g[(0, 0)] = c(theta.cos(), theta.sin());
        g.view_mut((1, 1), (d - 1, d - 1)).copy_from(&rest);
        let b = &g * &local;
        acc += &b * b.adjoint();
    }
    let mean = &frame * (acc / cr(samples as f64)) * frame.adjoint();
    Operator::square(mean, psi.dims().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverPoint {
    pub p_m: f64,
    /// First iteration count whose success probability reaches `1 − ε`, or
    /// the first peak of the success probability if the window is skipped.
    pub iterations: Option<usize>,
    /// Small-angle estimate `(π/4)/√p_m`.
    pub predicted: f64,
}

/// Runs plain Grover iterations `R_ψ R_m` on `cos θ|0⟩ + sin θ|1⟩` with
/// target `|1⟩⟨1|` and records how many reach success probability `1 − ε`
/// (see [`GroverPoint::iterations`]).
pub fn grover_scaling_experiment(p_grid: &[f64], epsilon: f64) -> Result<Vec<GroverPoint>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    let mut out = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p_m = {p} outside (0, 1)")));
        }
        let psi = crate::linalg::Vector::from_vec(vec![cr((1.0 - p).sqrt()), cr(p.sqrt())]);
        let target = Projector::basis_states(&[1], vec![2])?;
        let start = Projector::from_basis(Mat::from_column_slice(2, 1, psi.as_slice()), vec![2])?;
        // Π_{π/2} = i(2Π − I), the reflections up to a phase.
        let step = crate::qsvt::pi_phi(&start, std::f64::consts::FRAC_PI_2).mat()
            * crate::qsvt::pi_phi(&target, std::f64::consts::FRAC_PI_2).mat();
        let cap = (10.0 / p.sqrt()).ceil() as usize + 10;
        let mut v = psi.clone();
        let mut iterations = None;
        let mut last = target.expectation(&v);
        for k in 0..=cap {
            if last >= 1.0 - epsilon {
                iterations = Some(k);
                break;
            }
            v = &step * v;
            let next = target.expectation(&v);
            if next < last {
                // The rotation stepped over the window; stop at the first peak.
                iterations = Some(k);
                break;
            }
            last = next;
        }
        out.push(GroverPoint { p_m: p, iterations, predicted: std::f64::consts::FRAC_PI_4 / p.sqrt() });
    }
    Ok(out)
}

/// Least-squares slope of `ln k` against `ln p_m` over points that reached the target.
pub fn loglog_slope(points: &[GroverPoint]) -> Result<f64> {
    let xy: Vec<(f64, f64)> =
        points.iter().filter_map(|g| g.iterations.filter(|&k| k > 0).map(|k| (g.p_m.ln(), (k as f64).ln()))).collect();
    if xy.len() < 2 {
        return Err(Error::Degenerate("slope needs at least two points with k > 0".into()));
    }
    let n = xy.len() as f64;
    let (mx, my) = (xy.iter().map(|p| p.0).sum::<f64>() / n, xy.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx < tol::DEGENERATE {
        return Err(Error::Degenerate("all p_m values coincide".into()));
    }
    Ok(xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UhlmannOracle {
    /// `F(I_R/d_R, Ψ_R|m)` from the reduced post-selected state.
    pub from_states: f64,
    /// The same from the branch spectrum, `(Σ √p_am)² / (d_R² p_m)`.
    pub from_spectrum: f64,
}

impl UhlmannOracle {
    pub fn agrees(&self) -> bool {
        (self.from_states - self.from_spectrum).abs() <= BOUND_SLACK
    }
}

pub fn uhlmann_oracle(instance: &MixedInstance) -> Result<UhlmannOracle> {
    let state = instance.postselected_state()?;
    let d_r = instance.partition.0;
    let rho_r = Operator::square(crate::linalg::reduced_density(state.amps(), state.dims(), &[0])?, vec![d_r])?;
    let mixed = Operator::square(identity(d_r) * cr(1.0 / d_r as f64), vec![d_r])?;
    let from_states = fidelity(&mixed, &rho_r)?;
    let spectrum = branch_spectrum(instance)?;
    let root: f64 = spectrum.values().iter().map(|p| p.sqrt()).sum();
    let d = d_r as f64;
    let from_spectrum = (root * root / (d * d * spectrum.p_m())).min(1.0);
    Ok(UhlmannOracle { from_states, from_spectrum })
}
