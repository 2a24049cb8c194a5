use super::circuit::Step;
use super::HybridCircuit;
use crate::linalg::{apply_local_cols, identity, product, svd, unitarity_defect, Mat, Operator, Projector, ONE};
use crate::{tol, Error, Result};

/// Largest dimension for which the full `U†U` unitarity check is run; above
/// it only a handful of columns are probed.
const FULL_CHECK_DIM: usize = 512;

/// A unitary together with the projectors selecting its encoded block.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    unitary: Operator,
    right: Projector,
    left: Projector,
}

impl BlockEncoding {
    pub fn new(unitary: Operator, right: Projector, left: Projector) -> Result<Self> {
        let d = unitary.mat().nrows();
        if !unitary.is_square() || right.dim() != d || left.dim() != d {
            return Err(Error::Dimension(format!(
                "unitary {}x{}, projectors on {} and {}",
                d,
                unitary.mat().ncols(),
                right.dim(),
                left.dim()
            )));
        }
        let defect = if d <= FULL_CHECK_DIM {
            unitarity_defect(unitary.mat())
        } else {
            let step = d / 16;
            let cols: Vec<_> = (0..16).map(|k| unitary.mat().column(k * step).into_owned()).collect();
            let probe = Mat::from_columns(&cols);
            let gram = probe.adjoint() * &probe;
            crate::linalg::max_abs_diff(&gram, &identity(16))
        };
        if defect > tol::STRUCTURAL {
            return Err(Error::Domain(format!("block-encoding unitary defect {defect:.3e}")));
        }
        Ok(Self { unitary, right, left })
    }

    pub fn unitary(&self) -> &Operator {
        &self.unitary
    }

    /// `Π`, the input-side projector.
    pub fn right_projector(&self) -> &Projector {
        &self.right
    }

    /// `Π̃`, the output-side projector.
    pub fn left_projector(&self) -> &Projector {
        &self.left
    }

    /// The encoded block in the projectors' bases: `Ṽ† U V` (rank(Π̃) × rank(Π)).
    ///
    /// Only `U V` is ever formed, so entries of `U` outside the columns of `Π`
    /// never enter.
    pub fn encoded_matrix(&self) -> Mat {
        self.left.basis().adjoint() * (self.unitary.mat() * self.right.basis())
    }

    /// `Π̃ U Π` as a full operator on the unitary's space.
    pub fn projected_operator(&self) -> Mat {
        self.left.basis() * self.encoded_matrix() * self.right.basis().adjoint()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        svd(&self.encoded_matrix()).singular_values
    }
}

/// Modular increment `|i⟩ → |i+1 mod dim⟩`.
pub fn add_gate(dim: usize) -> Mat {
    let mut m = Mat::zeros(dim, dim);
    for i in 0..dim {
        m[((i + 1) % dim, i)] = ONE;
    }
    m
}

/// Qubits needed to hold the compression counter for `n_meas` measurements.
pub fn counter_qubits(n_meas: usize) -> usize {
    (usize::BITS - n_meas.leading_zeros()) as usize
}

fn square_unitary(op: &Operator) -> Result<usize> {
    if !op.is_square() {
        return Err(Error::Dimension("preparation unitary must be square".into()));
    }
    Ok(op.mat().nrows())
}

/// `Π_m U |0…0⟩⟨0…0|`: a rank-one encoding of the post-selected state.
pub fn postselect_encoding(prep_unitary: &Operator, target: &Projector) -> Result<BlockEncoding> {
    let d = square_unitary(prep_unitary)?;
    if target.dim() != d {
        return Err(Error::Dimension(format!("target projector on {} vs unitary {d}", target.dim())));
    }
    let psi = prep_unitary.mat().column(0).into_owned();
    let p_m = target.expectation(&psi);
    if p_m < tol::DEGENERATE {
        return Err(Error::Degenerate(format!("post-selection probability {p_m:.3e}")));
    }
    let right = Projector::basis_states(&[0], prep_unitary.row_dims().to_vec())?;
    BlockEncoding::new(prep_unitary.clone(), right, target.clone())
}

/// `Π_m U (I_A ⊗ |0⟩⟨0|_B)` for a mixed input on `A`.
pub fn mixed_postselect_encoding(
    prep_unitary: &Operator,
    partition: (usize, usize),
    target: &Projector,
) -> Result<BlockEncoding> {
    let d = square_unitary(prep_unitary)?;
    let (da, db) = partition;
    if da * db != d || target.dim() != d {
        return Err(Error::Dimension(format!("partition {da}x{db}, target on {}, unitary {d}", target.dim())));
    }
    let indices: Vec<usize> = (0..da).map(|a| a * db).collect();
    let right = Projector::basis_states(&indices, prep_unitary.row_dims().to_vec())?;
    BlockEncoding::new(prep_unitary.clone(), right, target.clone())
}

fn check_envelope(dims: &[usize]) -> Result<()> {
    let d = dims.iter().try_fold(1usize, |acc, &x| acc.checked_mul(x));
    match d {
        Some(d) if d <= tol::MAX_OPERATOR_DIM => Ok(()),
        _ => Err(Error::Resource(format!("encoding on dims {dims:?} exceeds {} amplitudes", tol::MAX_OPERATOR_DIM))),
    }
}

fn pauli_x() -> Mat {
    add_gate(2)
}

fn swap() -> Mat {
    let mut m = Mat::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = ONE;
    }
    m
}

/// Defers every mid-circuit measurement with a SWAP onto a fresh ancilla
/// prepared in the forced outcome.
///
/// Ancilla `j` is qubit `n + j`. The block is selected by ancillas in `|0…0⟩`
/// on the right and in `|m_1 … m_N⟩` on the left.
pub fn swap_deferral_encoding(circuit: &HybridCircuit) -> Result<BlockEncoding> {
    let n = circuit.n_qubits();
    let meas = circuit.measurements();
    let total = n + meas.len();
    let dims = vec![2; total];
    check_envelope(&dims)?;
    let d = product(&dims);
    let mut u = identity(d);
    for (j, m) in meas.iter().enumerate() {
        if m.outcome == 1 {
            apply_local_cols(&mut u, &pauli_x(), &[n + j], &dims);
        }
    }
    let sw = swap();
    for step in circuit.steps() {
        match step {
            Step::Gate(g) => apply_local_cols(&mut u, &g.matrix, &g.qubits, &dims),
            Step::Measure(j, m) => apply_local_cols(&mut u, &sw, &[n + j, m.qubit], &dims),
        }
    }
    let anc = 1usize << meas.len();
    let target = meas.iter().fold(0usize, |acc, m| acc * 2 + m.outcome as usize);
    let right: Vec<usize> = (0..1usize << n).map(|i| i * anc).collect();
    let left: Vec<usize> = (0..1usize << n).map(|i| i * anc + target).collect();
    BlockEncoding::new(
        Operator::square(u, dims.clone())?,
        Projector::basis_states(&right, dims.clone())?,
        Projector::basis_states(&left, dims)?,
    )
}

/// Replaces the measurement ancillas by one modular counter.
///
/// The counter starts at `1` and is incremented each time a measured qubit
/// matches its forced outcome; with dimension `N + 1` it returns to `0`
/// exactly when all `N` measurements succeed.
pub fn compression_gadget_encoding(circuit: &HybridCircuit) -> Result<BlockEncoding> {
    let n = circuit.n_qubits();
    let n_meas = circuit.measurements().len();
    let cdim = n_meas + 1;
    let mut dims = vec![2; n];
    dims.push(cdim);
    check_envelope(&dims)?;
    let d = product(&dims);
    let add = add_gate(cdim);
    let mut u = identity(d);
    apply_local_cols(&mut u, &add, &[n], &dims);
    let controlled: [Mat; 2] = [0u8, 1].map(|m| {
        let mut g = Mat::zeros(2 * cdim, 2 * cdim);
        for b in 0..2usize {
            let block = if b == m as usize { add.clone() } else { identity(cdim) };
            g.view_mut((b * cdim, b * cdim), (cdim, cdim)).copy_from(&block);
        }
        g
    });
    for step in circuit.steps() {
        match step {
            Step::Gate(g) => apply_local_cols(&mut u, &g.matrix, &g.qubits, &dims),
            Step::Measure(_, m) => apply_local_cols(&mut u, &controlled[m.outcome as usize], &[m.qubit, n], &dims),
        }
    }
    let idx: Vec<usize> = (0..1usize << n).map(|i| i * cdim).collect();
    let proj = Projector::basis_states(&idx, dims.clone())?;
    BlockEncoding::new(Operator::square(u, dims)?, proj.clone(), proj)
}
