//! Decoders for measurement-induced teleportation: the pseudoinverse
//! decoder and the Yoshida–Kitaev and Petz-like post-selection decoders, in
//! the teleportation and the decoherence settings.

mod circuit;
mod instance;

pub use circuit::{fpaa_decode, pseudoinverse_circuit, simulate_decoder, DecoderBlock};
pub use instance::TeleportInstance;

use crate::linalg::{cr, psd_sqrt, purity_renyi2, reduced_density, svd, Mat, Operator, StateVector};
use crate::protocols::BranchSpectrum;
use crate::svtfun::SvtFunction;
use crate::{tol, Error, Result};

pub const DECODER_CSV_HEADER: &str = "decoder,p_star,f_decoding,p_succ,f_overall,f_uhlmann";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderReport {
    /// Fidelity of the decoded `R R'` state with the EPR pair.
    pub f_decoding: f64,
    pub p_succ: f64,
    pub f_overall: f64,
    /// Best fidelity any channel on `D` can reach.
    pub f_uhlmann: f64,
    /// Number of branches the decoder inverts (nonzero `p_am`).
    pub effective_rank: usize,
}

impl DecoderReport {
    fn new(f_decoding: f64, p_succ: f64, f_uhlmann: f64, effective_rank: usize) -> Self {
        Self { f_decoding, p_succ, f_overall: p_succ * f_decoding, f_uhlmann, effective_rank }
    }

    /// One CSV row; `p_star` is left empty for decoders without one.
    pub fn csv_row(&self, decoder: &str, p_star: Option<f64>) -> String {
        let p = p_star.map(|p| format!("{p:e}")).unwrap_or_default();
        format!(
            "{decoder},{p},{:.12},{:.12},{:.12},{:.12}",
            self.f_decoding, self.p_succ, self.f_overall, self.f_uhlmann
        )
    }
}

/// `F(I_R/d_R, ω_R|m)` from the branch probabilities.
pub fn teleport_uhlmann(spectrum: &BranchSpectrum) -> f64 {
    let d = spectrum.d_r() as f64;
    let root: f64 = spectrum.values().iter().map(|p| p.sqrt()).sum();
    (root * root / (d * d * spectrum.p_m())).min(1.0)
}

fn effective_rank(spectrum: &BranchSpectrum) -> usize {
    spectrum.values().iter().filter(|&&p| p >= tol::DEGENERATE).count()
}

/// Decoding by the transformation `f` of the singular values of `M†`.
///
/// Branches with `p_am` below the degeneracy threshold are dropped, so a
/// non-injective `M` is decoded on its injective part.
pub fn teleport_metrics(spectrum: &BranchSpectrum, f: &SvtFunction) -> Result<DecoderReport> {
    let values = spectrum
        .values()
        .iter()
        .map(|&p| if p >= tol::DEGENERATE { f.eval(p.sqrt()) } else { Ok(0.0) })
        .collect::<Result<Vec<_>>>()?;
    teleport_metrics_from_values(spectrum, &values)
}

/// [`teleport_metrics`] with `f(√p_am)` given per branch.
pub fn teleport_metrics_from_values(spectrum: &BranchSpectrum, f_values: &[f64]) -> Result<DecoderReport> {
    if f_values.len() != spectrum.d_r() {
        return Err(Error::Dimension(format!("{} values for {} branches", f_values.len(), spectrum.d_r())));
    }
    let rank = effective_rank(spectrum);
    if rank == 0 {
        return Err(Error::NonInjective(format!("all {} branch probabilities vanish", spectrum.d_r())));
    }
    let d = spectrum.d_r() as f64;
    let p_m = spectrum.p_m();
    let (mut cross, mut weight) = (0.0, 0.0);
    for (&p, &fs) in spectrum.values().iter().zip(f_values) {
        if p >= tol::DEGENERATE {
            cross += p.sqrt() * fs;
            weight += p * fs * fs;
        }
    }
    let p_succ = weight / (d * p_m);
    let f_decoding = if weight > 0.0 { (cross * cross / (d * weight)).min(1.0) } else { 0.0 };
    Ok(DecoderReport::new(f_decoding, p_succ, teleport_uhlmann(spectrum), rank))
}

/// The pseudoinverse decoder with the ideal truncated inverse at `p_star`.
pub fn pseudoinverse_decode(instance: &TeleportInstance, p_star: f64) -> Result<DecoderReport> {
    teleport_metrics(instance.spectrum(), &SvtFunction::trunc_inverse(p_star)?)
}

// tr(ω_R|m)² from the branch probabilities.
fn reference_purity(spectrum: &BranchSpectrum) -> Result<f64> {
    let norm = spectrum.d_r() as f64 * spectrum.p_m();
    if norm < tol::DEGENERATE {
        return Err(Error::Degenerate(format!("outcome probability {:.3e}", spectrum.p_m())));
    }
    Ok(spectrum.values().iter().map(|p| (p / norm).powi(2)).sum())
}

/// Yoshida–Kitaev decoder: Bob prepares `ω*_{R'D'|m}` and post-selects `D D'`
/// on the EPR pair. Evaluated from the Rényi-2 entropy of `ω_D|m`.
pub fn yk_teleport_decode(instance: &TeleportInstance) -> Result<DecoderReport> {
    let state = instance.postmeasurement_state()?;
    let rho_d = Operator::square(reduced_density(state.amps(), state.dims(), &[1])?, vec![instance.d_d()])?;
    let (_, s2) = purity_renyi2(&rho_d);
    let d_r = instance.d_r() as f64;
    let p_m = instance.p_m();
    let f = (s2.exp() / d_r).min(1.0);
    let p_succ = p_m / instance.d_d() as f64 * (-s2).exp();
    Ok(DecoderReport::new(f, p_succ, teleport_uhlmann(instance.spectrum()), effective_rank(instance.spectrum())))
}

/// Same decoder as [`yk_teleport_decode`], contracting the two copies
/// directly: `⟨EPR|_{DD'} |ψ_m⟩_{RD} |ψ_m*⟩_{R'D'} = A A†/√d_D` with
/// `A[r, d]` the amplitudes of `ω_RD|m`.
pub fn yk_teleport_contraction(instance: &TeleportInstance) -> Result<DecoderReport> {
    let state = instance.postmeasurement_state()?;
    let (d_r, d_d) = (instance.d_r(), instance.d_d());
    let a = crate::linalg::Mat::from_fn(d_r, d_d, |r, d| state.amps()[r * d_d + d]);
    let joint = &a * a.adjoint() * cr(1.0 / (d_d as f64).sqrt());
    let norm2 = joint.norm_squared();
    if norm2 < tol::DEGENERATE {
        return Err(Error::Degenerate("EPR post-selection has zero weight".into()));
    }
    let overlap = joint.trace() / cr((d_r as f64).sqrt());
    // Bob's own copy is post-selected on |m*⟩ with probability p_m.
    let p_succ = instance.p_m() * norm2;
    let f = (overlap.norm_sqr() / norm2).min(1.0);
    Ok(DecoderReport::new(f, p_succ, teleport_uhlmann(instance.spectrum()), effective_rank(instance.spectrum())))
}

/// Petz-like decoder: back-evolve `|m⟩_E ⊗ D` with `U†` and post-select `B`
/// on `|0⟩`. Same fidelity as YK; success probability `d_R p_m e^{-S²(ω_R|m)}`.
pub fn petz_teleport_decode(instance: &TeleportInstance) -> Result<DecoderReport> {
    let spectrum = instance.spectrum();
    let purity = reference_purity(spectrum)?;
    let d_r = instance.d_r() as f64;
    let f = (1.0 / (d_r * purity)).min(1.0);
    let p_succ = d_r * spectrum.p_m() * purity;
    Ok(DecoderReport::new(f, p_succ, teleport_uhlmann(spectrum), effective_rank(spectrum)))
}

/// YK and Petz-like decoders after erasure of `E`, for a pure `ω_RED` with
/// dims `[d_R, d_E, d_D]`.
pub fn decoherence_decoders(state: &StateVector) -> Result<(DecoderReport, DecoderReport)> {
    let dims = state.dims();
    if dims.len() != 3 {
        return Err(Error::Dimension(format!("expected dims [d_R, d_E, d_D], got {dims:?}")));
    }
    if state.dim() > tol::MAX_OPERATOR_DIM {
        return Err(Error::Resource(format!("state dimension {} exceeds {}", state.dim(), tol::MAX_OPERATOR_DIM)));
    }
    let (d_r, d_e, d_d) = (dims[0], dims[1], dims[2]);
    let amps = state.amps();
    let rho_d = Operator::square(reduced_density(amps, dims, &[2])?, vec![d_d])?;
    let rho_rd = Operator::square(reduced_density(amps, dims, &[0, 2])?, vec![d_r, d_d])?;
    let rho_re = Operator::square(reduced_density(amps, dims, &[0, 1])?, vec![d_r, d_e])?;
    let (p2_d, s2_d) = purity_renyi2(&rho_d);
    let (_, s2_rd) = purity_renyi2(&rho_rd);
    let f = ((s2_d - s2_rd).exp() / d_r as f64).min(1.0);
    let f_uhlmann = decoupling_fidelity(&rho_re)?;
    let yk = DecoderReport::new(f, p2_d / d_d as f64, f_uhlmann, d_r);
    let petz = DecoderReport::new(f, d_r as f64 / d_e as f64 * p2_d, f_uhlmann, d_r);
    Ok((yk, petz))
}

/// `max_τ F(ω_RE, I_R/d_R ⊗ τ_E)`, the best EPR fidelity of any channel on
/// `D` when `ω_RED` is pure. `rho_re` must have dims `[d_R, d_E]`.
///
/// Alternates between the polar factor of `√ω_RE (I ⊗ √τ)` and the optimal
/// `√τ` for that factor; each step cannot decrease the objective, which is
/// concave in `τ`.
pub fn decoupling_fidelity(rho_re: &Operator) -> Result<f64> {
    let dims = rho_re.row_dims();
    if dims.len() != 2 {
        return Err(Error::Dimension(format!("expected dims [d_R, d_E], got {dims:?}")));
    }
    let (d_r, d_e) = (dims[0], dims[1]);
    let root = psd_sqrt(rho_re.mat()).ok_or_else(|| Error::Domain("ω_RE is not PSD".into()))?;
    let lift = |s: &Mat| crate::linalg::kron(&Mat::identity(d_r, d_r), s);
    // Start from √ω_E.
    let rho_e = crate::linalg::partial_trace(rho_re, &[1])?;
    let mut s = psd_sqrt(rho_e.mat()).ok_or_else(|| Error::Domain("ω_E is not PSD".into()))?;
    let mut best = 0.0;
    for _ in 0..MAX_DECOUPLING_STEPS {
        let dec = svd(&(&root * lift(&s)));
        let value: f64 = dec.singular_values.iter().sum();
        let done = value - best < 1e-13;
        best = f64::max(best, value);
        if done {
            break;
        }
        // tr(W √ω (I ⊗ S)) with W the inverse polar factor; maximize over S.
        let w = &dec.right * dec.left.adjoint();
        let g = w * &root;
        let mut h = Mat::zeros(d_e, d_e);
        for r in 0..d_r {
            h += g.view((r * d_e, r * d_e), (d_e, d_e));
        }
        let h = (&h + h.adjoint()) * cr(0.5);
        let (vals, vecs) = crate::linalg::hermitian_eigen(&h);
        let mut next = Mat::zeros(d_e, d_e);
        for (k, &v) in vals.iter().enumerate() {
            if v > 0.0 {
                let col = vecs.column(k);
                next += col * col.adjoint() * cr(v);
            }
        }
        let n = next.norm();
        if n < tol::DEGENERATE {
            break;
        }
        s = next / cr(n);
    }
    Ok((best * best / d_r as f64).min(1.0))
}

const MAX_DECOUPLING_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AqecCheck {
    /// `(1/2d_R) Σ_a |p_am/p_m − 1|`.
    pub deviation: f64,
    /// Whether `deviation ≤ ε'`.
    pub satisfied: bool,
    /// `(1 − ε'/ε)(1 − ε)`.
    pub p_qsvt_bound: f64,
    /// Pseudoinverse success probability at `p* = (1 − ε'/ε) p_m`.
    pub p_qsvt_measured: f64,
}

/// Approximate error-correction condition on the branch probabilities and
/// the resulting lower bound on the pseudoinverse success probability.
pub fn aqec_check(spectrum: &BranchSpectrum, epsilon: f64, epsilon_prime: f64) -> Result<AqecCheck> {
    if !(0.0 <= epsilon_prime && epsilon_prime < epsilon && epsilon < 1.0) {
        return Err(Error::Domain(format!("need 0 <= eps' < eps < 1, got eps' = {epsilon_prime}, eps = {epsilon}")));
    }
    let p_m = spectrum.p_m();
    if p_m < tol::DEGENERATE {
        return Err(Error::Degenerate(format!("p_m = {p_m:.3e}")));
    }
    let d = spectrum.d_r() as f64;
    let deviation = spectrum.values().iter().map(|p| (p / p_m - 1.0).abs()).sum::<f64>() / (2.0 * d);
    let alpha = 1.0 - epsilon_prime / epsilon;
    let p_qsvt_measured = teleport_metrics(spectrum, &SvtFunction::trunc_inverse(alpha * p_m)?)?.p_succ;
    Ok(AqecCheck {
        deviation,
        satisfied: deviation <= epsilon_prime,
        p_qsvt_bound: alpha * (1.0 - epsilon),
        p_qsvt_measured,
    })
}
