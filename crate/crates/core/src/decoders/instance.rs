use crate::linalg::{complete_unitary, haar_unitary, unitarity_defect, Mat, Projector, Rng, StateVector, Vector, ZERO};
use crate::protocols::{branch_spectrum_from_isometry, BranchSpectrum};
use crate::{tol, Error, Result};

/// Teleportation setup: `U` encodes `A` (with `B` in `|0⟩`) into `E ⊗ D`,
/// and `E` is found in the outcome state `|m⟩`.
#[derive(Debug, Clone)]
pub struct TeleportInstance {
    unitary: Mat,
    input: (usize, usize),
    output: (usize, usize),
    outcome: Vector,
    /// `M = (⟨m|_E ⊗ I_D) U (I_A ⊗ |0⟩_B)`, `d_D × d_A`.
    kraus: Mat,
    spectrum: BranchSpectrum,
}

impl TeleportInstance {
    pub fn new(unitary: Mat, input: (usize, usize), output: (usize, usize), outcome: Vector) -> Result<Self> {
        let d = unitary.nrows();
        if unitary.ncols() != d || input.0 * input.1 != d || output.0 * output.1 != d {
            return Err(Error::Dimension(format!(
                "unitary {}x{} vs input {input:?} and output {output:?}",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        if d > tol::MAX_OPERATOR_DIM {
            return Err(Error::Resource(format!("dimension {d} exceeds {}", tol::MAX_OPERATOR_DIM)));
        }
        if outcome.len() != output.0 || (outcome.norm() - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::Domain("outcome must be a unit vector on E".into()));
        }
        let defect = unitarity_defect(&unitary);
        if defect > tol::STRUCTURAL * (d as f64).max(1.0) {
            return Err(Error::Domain(format!("encoding is not unitary (defect {defect:.3e})")));
        }
        let (d_a, d_b) = input;
        let d_d = output.1;
        let isometry = Mat::from_columns(&(0..d_a).map(|a| unitary.column(a * d_b).into_owned()).collect::<Vec<_>>());
        let target = outcome_projector(&outcome, d_d)?;
        let spectrum = branch_spectrum_from_isometry(&isometry, &target)?;
        let kraus = target.basis().adjoint() * &isometry;
        Ok(Self { unitary, input, output, outcome, kraus, spectrum })
    }

    /// Haar-random encoding with outcome `|0⟩_E`.
    pub fn random(input: (usize, usize), output: (usize, usize), rng: &mut Rng) -> Result<Self> {
        let u = haar_unitary(input.0 * input.1, rng);
        let mut m = Vector::from_element(output.0, ZERO);
        m[0] = crate::linalg::ONE;
        Self::new(u, input, output, m)
    }

    /// An instance whose branch probabilities are exactly `p_am` (in a
    /// random basis), with `d_B = d_E = 2`, `d_D = d_A` and outcome `|0⟩_E`.
    pub fn from_spectrum(p_am: &[f64], rng: &mut Rng) -> Result<Self> {
        let d_a = p_am.len();
        if d_a == 0 || p_am.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Domain("branch probabilities must be a nonempty list in [0, 1]".into()));
        }
        let (left, right) = (haar_unitary(d_a, rng), haar_unitary(d_a, rng));
        // Column a of the isometry: √p_a |0⟩_E ⊗ left|a⟩ + √(1−p_a) |1⟩_E ⊗ left|a⟩, then rotated on A.
        let mut w = Mat::zeros(2 * d_a, d_a);
        for (a, &p) in p_am.iter().enumerate() {
            for i in 0..d_a {
                w[(i, a)] = left[(i, a)] * p.sqrt();
                w[(d_a + i, a)] = left[(i, a)] * (1.0 - p).sqrt();
            }
        }
        let w = w * right.adjoint();
        let full = complete_unitary(&w, rng)?;
        // Put the isometry on the columns with B in |0⟩.
        let mut u = Mat::zeros(2 * d_a, 2 * d_a);
        for a in 0..d_a {
            u.set_column(2 * a, &full.column(a));
            u.set_column(2 * a + 1, &full.column(d_a + a));
        }
        let mut m = Vector::from_element(2, ZERO);
        m[0] = crate::linalg::ONE;
        Self::new(u, (d_a, 2), (2, d_a), m)
    }

    pub fn unitary(&self) -> &Mat {
        &self.unitary
    }

    /// `(d_A, d_B)`.
    pub fn input_dims(&self) -> (usize, usize) {
        self.input
    }

    /// `(d_E, d_D)`.
    pub fn output_dims(&self) -> (usize, usize) {
        self.output
    }

    pub fn d_r(&self) -> usize {
        self.input.0
    }

    pub fn d_e(&self) -> usize {
        self.output.0
    }

    pub fn d_d(&self) -> usize {
        self.output.1
    }

    pub fn outcome(&self) -> &Vector {
        &self.outcome
    }

    /// `M`, mapping `A` to `D`.
    pub fn kraus(&self) -> &Mat {
        &self.kraus
    }

    pub fn spectrum(&self) -> &BranchSpectrum {
        &self.spectrum
    }

    pub fn p_m(&self) -> f64 {
        self.spectrum.p_m()
    }

    /// `|m⟩⟨m|_E ⊗ I_D` on the output space.
    pub fn outcome_projector(&self) -> Projector {
        outcome_projector(&self.outcome, self.d_d()).expect("validated at construction")
    }

    /// `Σ_a |a⟩_R U|a, 0⟩ / √d_R` with dims `[d_R, d_E, d_D]`.
    pub fn encoded_state(&self) -> StateVector {
        let (d_r, d_b) = self.input;
        let d = self.unitary.nrows();
        let mut amps = Vector::from_element(d_r * d, ZERO);
        let s = crate::linalg::cr(1.0 / (d_r as f64).sqrt());
        for a in 0..d_r {
            for i in 0..d {
                amps[a * d + i] = self.unitary[(i, a * d_b)] * s;
            }
        }
        StateVector::new(amps, vec![d_r, self.output.0, self.output.1]).expect("isometry columns are orthonormal")
    }

    /// Normalized `ω_RD|m ∝ Σ_a |a⟩_R M|a⟩` with dims `[d_R, d_D]`.
    pub fn postmeasurement_state(&self) -> Result<StateVector> {
        if self.p_m() < tol::DEGENERATE {
            return Err(Error::Degenerate(format!("outcome probability {:.3e}", self.p_m())));
        }
        let (d_r, d_d) = (self.d_r(), self.d_d());
        let amps = Vector::from_fn(d_r * d_d, |i, _| self.kraus[(i % d_d, i / d_d)]);
        StateVector::normalized(amps, vec![d_r, d_d])
    }
}

fn outcome_projector(outcome: &Vector, d_d: usize) -> Result<Projector> {
    let d_e = outcome.len();
    let mut basis = Mat::zeros(d_e * d_d, d_d);
    for e in 0..d_e {
        for k in 0..d_d {
            basis[(e * d_d + k, k)] = outcome[e];
        }
    }
    Projector::from_basis(basis, vec![d_e * d_d])
}
