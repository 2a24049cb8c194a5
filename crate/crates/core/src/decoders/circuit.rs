use super::{teleport_uhlmann, DecoderReport, TeleportInstance};
use crate::blockenc::BlockEncoding;
use crate::linalg::{cr, identity, kron, Mat, Operator, Projector, Vector};
use crate::protocols::fpaa_phases;
use crate::qsvt::{apply_sequence, solve_phases, PhaseSequence};
use crate::svtfun::inverse_polynomial;
use crate::{tol, Error, Result};

const PHASE_TOL: f64 = 1e-9;

/// Which block encoding of `M†` the decoder circuit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderBlock {
    /// `U†` on `E ⊗ D` with `|m⟩_E` in, `B` in `|0⟩` out; encodes `M†` exactly.
    Petz,
    /// A conjugate copy `U*` plus EPR post-selection on `D D'`; encodes `M†/√(d_D d_R)`.
    Yk,
}

impl DecoderBlock {
    pub fn encoding(self, instance: &TeleportInstance) -> Result<BlockEncoding> {
        match self {
            Self::Petz => petz_encoding(instance),
            Self::Yk => yk_encoding(instance),
        }
    }
}

fn petz_encoding(instance: &TeleportInstance) -> Result<BlockEncoding> {
    let u = instance.unitary();
    let d = u.nrows();
    let d_b = instance.input_dims().1;
    let right = instance.outcome_projector();
    let outputs: Vec<usize> = (0..instance.d_r()).map(|a| a * d_b).collect();
    let left = Projector::basis_states(&outputs, vec![d])?;
    BlockEncoding::new(Operator::square(u.adjoint(), vec![d])?, right, left)
}

// Real reflection taking |0⟩ to `target` (real, unit norm).
fn householder(target: &Vector) -> Mat {
    let d = target.len();
    let mut w = -target.clone();
    w[0] += cr(1.0);
    let n2 = w.norm_squared();
    if n2 < 1e-30 {
        return identity(d);
    }
    identity(d) - (&w * w.adjoint()) * cr(2.0 / n2)
}

// Registers D ⊗ R' ⊗ A'B', where A'B' is read as E'D' after U*.
fn yk_encoding(instance: &TeleportInstance) -> Result<BlockEncoding> {
    let u = instance.unitary();
    let d = u.nrows();
    let (d_r, d_b) = instance.input_dims();
    let (d_e, d_d) = instance.output_dims();
    let total = d_d * d_r * d;
    if total > tol::MAX_OPERATOR_DIM {
        return Err(Error::Resource(format!("YK encoding needs dimension {total}, limit {}", tol::MAX_OPERATOR_DIM)));
    }
    let epr = crate::linalg::epr_state(d_r).into_amps();
    let prep = kron(&householder(&epr), &identity(d_b));
    let bob = kron(&identity(d_r), &u.conjugate()) * prep;
    let g = kron(&identity(d_d), &bob);

    let inner = d_r * d;
    let inputs: Vec<usize> = (0..d_d).map(|k| k * inner).collect();
    let right = Projector::basis_states(&inputs, vec![total])?;
    let m = instance.outcome();
    let s = cr(1.0 / (d_d as f64).sqrt());
    let mut basis = Mat::zeros(total, d_r);
    for r in 0..d_r {
        for k in 0..d_d {
            for e in 0..d_e {
                basis[(k * inner + r * d + e * d_d + k, r)] = m[e].conj() * s;
            }
        }
    }
    let left = Projector::from_basis(basis, vec![total])?;
    BlockEncoding::new(Operator::square(g, vec![total])?, right, left)
}

/// Runs the decoder circuit on `ω_RD|m` with `R` as a spectator and reports
/// against the EPR pair on `R R'`. Without phases the block is applied once
/// (plain post-selection); with phases the real-part QSVT circuit runs.
pub fn simulate_decoder(
    instance: &TeleportInstance,
    block: DecoderBlock,
    phases: Option<&PhaseSequence>,
) -> Result<DecoderReport> {
    let p_m = instance.p_m();
    if p_m < tol::DEGENERATE {
        return Err(Error::Degenerate(format!("outcome probability {p_m:.3e}")));
    }
    let enc = block.encoding(instance)?;
    let d_r = instance.d_r();
    let x = instance.kraus() * cr(1.0 / (d_r as f64 * p_m).sqrt());
    let out = match phases {
        None => enc.encoded_matrix() * x,
        Some(ph) => {
            let v = enc.right_projector().basis() * x;
            let vl = enc.left_projector().basis().adjoint();
            let plus = &vl * apply_sequence(&enc, ph.phases(), &v);
            let minus = &vl * apply_sequence(&enc, ph.negated().phases(), &v);
            (plus + minus) * cr(0.5)
        }
    };
    // Column r is the R' state paired with |r⟩_R.
    let p_succ = out.norm_squared();
    let f = if p_succ > 0.0 { (out.trace().norm_sqr() / (d_r as f64 * p_succ)).min(1.0) } else { 0.0 };
    let rank = instance.spectrum().values().iter().filter(|&&p| p >= tol::DEGENERATE).count();
    Ok(DecoderReport {
        f_decoding: f,
        p_succ,
        f_overall: f * p_succ,
        f_uhlmann: teleport_uhlmann(instance.spectrum()),
        effective_rank: rank,
    })
}

/// Circuit-level pseudoinverse decoder: truncated-inverse phases with
/// multiplicative error `delta` on the Petz block.
pub fn pseudoinverse_circuit(
    instance: &TeleportInstance,
    p_star: f64,
    delta: f64,
) -> Result<(PhaseSequence, DecoderReport)> {
    let p_max = instance.spectrum().p_max();
    let phases = solve_phases(&inverse_polynomial(p_star, p_max.max(p_star), delta)?, PHASE_TOL)?;
    let report = simulate_decoder(instance, DecoderBlock::Petz, Some(&phases))?;
    Ok((phases, report))
}

/// The YK or Petz-like decoder with its post-selection replaced by FPAA.
pub fn fpaa_decode(instance: &TeleportInstance, block: DecoderBlock, p_star: f64, delta: f64) -> Result<DecoderReport> {
    let phases = fpaa_phases(p_star, delta)?;
    simulate_decoder(instance, block, Some(&phases))
}
