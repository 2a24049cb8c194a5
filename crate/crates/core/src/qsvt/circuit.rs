use super::PhaseSequence;
use crate::blockenc::BlockEncoding;
use crate::linalg::{c, embed_local, svd, Mat, Operator, Projector, StateVector, Vector};
use crate::svtfun::SvtFunction;
use crate::{tol, Error, Result};

/// `e^{iφ} Π + e^{-iφ} (I − Π)`.
pub fn pi_phi(projector: &Projector, phi: f64) -> Operator {
    let d = projector.dim();
    let (ep, em) = (c(phi.cos(), phi.sin()), c(phi.cos(), -phi.sin()));
    let mat = Mat::identity(d, d) * em + projector.matrix() * (ep - em);
    Operator::square(mat, projector.dims().to_vec()).expect("projector dims are consistent")
}

/// `C_Π NOT · (I ⊗ e^{-iφZ}) · C_Π NOT` with the ancilla as the last qubit.
///
/// Ancilla `|0⟩` sees `Π_φ`, ancilla `|1⟩` sees `Π_{-φ}`.
pub fn pi_phi_gadget(projector: &Projector, phi: f64) -> Operator {
    let d = projector.dim();
    let p = projector.matrix();
    let q = Mat::identity(d, d) - &p;
    let x = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let cnot = p.kronecker(&x) + q.kronecker(&Mat::identity(2, 2));
    let rz = Mat::from_row_slice(2, 2, &[c(phi.cos(), -phi.sin()), c(0.0, 0.0), c(0.0, 0.0), c(phi.cos(), phi.sin())]);
    let mut dims = projector.dims().to_vec();
    dims.push(2);
    let anc = dims.len() - 1;
    let mid = embed_local(&rz, &[anc], &dims);
    Operator::square(&cnot * mid * &cnot, dims).expect("dims are consistent")
}

// x ← Π_φ x without forming Π_φ.
fn apply_pi_phi(proj: &Projector, phi: f64, x: &mut Mat) {
    let (ep, em) = (c(phi.cos(), phi.sin()), c(phi.cos(), -phi.sin()));
    let v = proj.basis();
    let coeff = v.adjoint() * &*x;
    *x *= em;
    *x += v * coeff * (ep - em);
}

/// `U_φ x` for `U_φ = Π̃_{φ_1} U Π_{φ_2} U† Π̃_{φ_3} U …` (rightmost factor acts first).
pub fn apply_sequence(block: &BlockEncoding, phases: &[f64], x: &Mat) -> Mat {
    let u = block.unitary().mat();
    let d = phases.len();
    let mut y = x.clone();
    // Position j (0-based from the left) carries φ_{j+1}; even positions sit
    // after a U (output side), odd positions after a U†.
    for j in (0..d).rev() {
        if (d - 1 - j).is_multiple_of(2) {
            y = u * y;
            apply_pi_phi(block.left_projector(), phases[j], &mut y);
        } else {
            y = u.adjoint() * y;
            apply_pi_phi(block.right_projector(), phases[j], &mut y);
        }
    }
    y
}

/// The full unitary `U_φ`.
pub fn alternating_sequence(block: &BlockEncoding, phases: &PhaseSequence) -> Operator {
    let d = block.unitary().mat().nrows();
    let m = apply_sequence(block, phases.phases(), &Mat::identity(d, d));
    Operator::square(m, block.unitary().row_dims().to_vec()).expect("dims are consistent")
}

/// `Ṽ† U_φ V`, the transformed block in the projectors' bases. With
/// `real_part` the block of the `|+⟩`-flagged gadget, `(P̃ + P̃*)(M)/2`.
pub fn sequence_block(block: &BlockEncoding, phases: &PhaseSequence, real_part: bool) -> Mat {
    let v = block.right_projector().basis();
    let vl = block.left_projector().basis();
    let plus = vl.adjoint() * apply_sequence(block, phases.phases(), v);
    if !real_part {
        return plus;
    }
    let minus = vl.adjoint() * apply_sequence(block, phases.negated().phases(), v);
    (plus + minus) * c(0.5, 0.0)
}

/// `Σ f(s_i) u_i v_i†` in the projectors' bases.
pub fn exact_block(block: &BlockEncoding, f: &SvtFunction) -> Result<Mat> {
    let dec = svd(&block.encoded_matrix());
    for &s in &dec.singular_values {
        f.eval(s)?;
    }
    Ok(dec.transform(|s| f.eval_unchecked(s)))
}

/// `Σ f(s_i) u_i v_i†` as an operator on the full space.
pub fn apply_exact(block: &BlockEncoding, f: &SvtFunction) -> Result<Operator> {
    let inner = exact_block(block, f)?;
    let full = block.left_projector().basis() * inner * block.right_projector().basis().adjoint();
    Operator::square(full, block.unitary().row_dims().to_vec())
}

/// A block encoding plus phases, with or without the real-part ancilla.
#[derive(Debug, Clone)]
pub struct QsvtRun {
    pub block: BlockEncoding,
    pub phases: PhaseSequence,
    pub use_real_part_gadget: bool,
}

impl QsvtRun {
    /// Flagged subspaces: `Π̃` on the system and, with the gadget, `|+⟩⟨+|` on the ancilla.
    pub fn flag_projectors(&self) -> Vec<(&'static str, Projector)> {
        let mut out = vec![("system", self.block.left_projector().clone())];
        if self.use_real_part_gadget {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let plus = Mat::from_column_slice(2, 1, &[c(s, 0.0), c(s, 0.0)]);
            out.push(("ancilla", Projector::from_basis(plus, vec![2]).expect("|+> is normalized")));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct FlagOutcome {
    pub state: StateVector,
    pub flag_probability: f64,
}

/// Runs the circuit on `input` and post-selects every flag, exactly.
pub fn run_with_flags(run: &QsvtRun, input: &StateVector) -> Result<FlagOutcome> {
    let right = run.block.right_projector();
    if input.dim() != right.dim() {
        return Err(Error::Dimension(format!("input dim {} vs {}", input.dim(), right.dim())));
    }
    let leak = (input.amps() - right.apply(input.amps())).norm();
    if leak > tol::STATISTICAL {
        return Err(Error::Domain(format!("input leaves the block by {leak:.3e}")));
    }
    let x = Mat::from_column_slice(input.dim(), 1, input.amps().as_slice());
    let flagged = |phases: &[f64]| -> Vector {
        let y = apply_sequence(&run.block, phases, &x);
        run.block.left_projector().apply(&y.column(0).into_owned())
    };
    let out = if run.use_real_part_gadget {
        (flagged(run.phases.phases()) + flagged(run.phases.negated().phases())) * c(0.5, 0.0)
    } else {
        flagged(run.phases.phases())
    };
    let p = out.norm_squared();
    if p < tol::DEGENERATE {
        return Err(Error::Degenerate(format!("flag probability {p:.3e}")));
    }
    let state = StateVector::normalized(out, input.dims().to_vec())?;
    Ok(FlagOutcome { state, flag_probability: p })
}
