use super::{BoundCheckResult, BoundKind, Task};
use crate::decoders::{aqec_check, teleport_metrics, teleport_metrics_from_values};
use crate::linalg::Rng;
use crate::protocols::{metrics, metrics_from_values, BranchSpectrum};
use crate::svtfun::SvtFunction;
use crate::{tol, Error, Result};
use rand::Rng as _;

fn check_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} outside (0, 1)")))
    }
}

/// Per-branch `δ_a` with `|δ_a| ≤ delta` making `Δ₁ = −Δ₂` for branch weights `w`
/// (`Δ₁ = Σ w_a δ_a`, `Δ₂ = Σ w_a δ_a²`), which gives `F = 1 − Δ₂`.
///
/// The lightest branches with total weight at least `(1 − δ)/2` take a
/// common value `x ∈ [0, δ]`; the rest take `−δ`.
pub fn worst_case_perturbation(weights: &[f64], delta: f64) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]));
    let mut w = 0.0;
    let mut group = vec![false; weights.len()];
    for &i in &order {
        if w >= (1.0 - delta) / 2.0 {
            break;
        }
        w += weights[i] / total;
        group[i] = true;
    }
    // W x² + W x − (1 − W) δ (1 − δ) = 0, positive root.
    let x = if w > 0.0 { (-w + (w * w + 4.0 * w * (1.0 - w) * delta * (1.0 - delta)).sqrt()) / (2.0 * w) } else { 0.0 };
    group.iter().map(|&g| if g { x.min(delta) } else { -delta }).collect()
}

fn branch_weights(spectrum: &BranchSpectrum, task: Task) -> Vec<f64> {
    let norm = spectrum.d_r() as f64 * spectrum.p_m();
    spectrum
        .values()
        .iter()
        .map(|&p| match task {
            Task::Mixed => p / norm,
            Task::Teleport => 1.0 / spectrum.d_r() as f64,
        })
        .collect()
}

/// `F_QSVT` when the ideal transformation is perturbed by `1 + δ_a` on branch `a`.
pub(super) fn perturbed_fidelity(spectrum: &BranchSpectrum, task: Task, deltas: &[f64]) -> Result<f64> {
    match task {
        Task::Mixed => {
            let r = spectrum.p_max().sqrt();
            let values: Vec<f64> =
                spectrum.values().iter().zip(deltas).map(|(p, d)| p.sqrt() / r * (1.0 + d)).collect();
            Ok(metrics_from_values(spectrum, &values)?.f_qsvt)
        }
        Task::Teleport => {
            let r = spectrum.p_min().sqrt();
            let values: Vec<f64> = spectrum
                .values()
                .iter()
                .zip(deltas)
                .map(|(&p, d)| if p >= tol::DEGENERATE { r / p.sqrt() * (1.0 + d) } else { 0.0 })
                .collect();
            Ok(teleport_metrics_from_values(spectrum, &values)?.f_decoding)
        }
    }
}

/// Minimum `F_QSVT` over `trials` perturbations `|δ(x)| ≤ delta_max` of the
/// ideal transformation (linear amplification or truncated inverse),
/// against the bound `1 − δ²`. The first trial is the analytic worst case,
/// then random signs at full magnitude alternate with uniform draws.
pub fn multiplicative_error_fidelity_check(
    spectrum: &BranchSpectrum,
    delta_max: f64,
    trials: usize,
    task: Task,
    rng: &mut Rng,
) -> Result<BoundCheckResult> {
    if !(0.0..1.0).contains(&delta_max) {
        return Err(Error::Domain(format!("delta_max = {delta_max} outside [0, 1)")));
    }
    if task == Task::Teleport && spectrum.p_min() < tol::DEGENERATE {
        return Err(Error::NonInjective("teleport check needs every p_am > 0".into()));
    }
    let d = spectrum.d_r();
    let mut worst =
        perturbed_fidelity(spectrum, task, &worst_case_perturbation(&branch_weights(spectrum, task), delta_max))?;
    for t in 1..trials {
        let deltas: Vec<f64> = if t % 2 == 1 {
            (0..d).map(|_| if rng.gen::<bool>() { delta_max } else { -delta_max }).collect()
        } else {
            (0..d).map(|_| delta_max * rng.gen_range(-1.0..=1.0)).collect()
        };
        worst = worst.min(perturbed_fidelity(spectrum, task, &deltas)?);
    }
    let name = match task {
        Task::Mixed => "multiplicative_error_mixed",
        Task::Teleport => "multiplicative_error_teleport",
    };
    Ok(BoundCheckResult::new(name, BoundKind::Lower, 1.0 - delta_max * delta_max, worst)
        .with("delta", delta_max)
        .with("trials", trials as f64))
}

/// Largest `α` allowed by the tail condition:
/// mixed, `(1/d_R p_m) Σ_{p_am > p_m/α} p_am ≤ ε`; teleport,
/// `(1/d_R) #{p_am < α p_m} ≤ ε`. Searches the sorted breakpoints exactly.
pub fn max_alpha(spectrum: &BranchSpectrum, epsilon: f64, task: Task) -> Result<f64> {
    let t = threshold(spectrum, epsilon, task)?;
    let p_m = spectrum.p_m();
    Ok(match task {
        Task::Mixed => p_m / t,
        Task::Teleport => t / p_m,
    })
}

// The breakpoint `p*` itself, so the cutoff functions see the exact spectrum value.
fn threshold(spectrum: &BranchSpectrum, epsilon: f64, task: Task) -> Result<f64> {
    check_unit("epsilon", epsilon)?;
    let p_m = spectrum.p_m();
    if p_m < tol::DEGENERATE {
        return Err(Error::Degenerate(format!("p_m = {p_m:.3e}")));
    }
    let mut sorted = spectrum.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let d = sorted.len();
    match task {
        Task::Mixed => {
            // Smallest threshold t = p_m/α with the mass strictly above t within budget.
            let budget = epsilon * d as f64 * p_m;
            let mut above = 0.0;
            let mut t = sorted[d - 1];
            for i in (0..d).rev() {
                let v = sorted[i];
                if i + 1 < d && sorted[i + 1] > v {
                    // Lowering t to v puts every value above v over the threshold.
                    if above > budget {
                        break;
                    }
                    t = v;
                }
                above += v;
            }
            Ok(t)
        }
        Task::Teleport => {
            let allowed = (epsilon * d as f64 + 1e-12).floor() as usize;
            Ok(sorted[allowed.min(d - 1)])
        }
    }
}

/// Tail bound: with the cutoff transformation at `p* = p_m/α` (mixed) or
/// `p* = α p_m` (teleport), the success probability is at least `(1 − ε) α`.
pub fn tail_bound_check(spectrum: &BranchSpectrum, epsilon: f64, task: Task) -> Result<BoundCheckResult> {
    let p_star = threshold(spectrum, epsilon, task)?;
    let p_m = spectrum.p_m();
    let alpha = match task {
        Task::Mixed => p_m / p_star,
        Task::Teleport => p_star / p_m,
    };
    let name = match task {
        Task::Mixed => "tail_bound_mixed",
        Task::Teleport => "tail_bound_teleport",
    };
    if alpha <= 0.0 {
        return Ok(BoundCheckResult::new(name, BoundKind::Lower, 0.0, 0.0).with("epsilon", epsilon).with("alpha", 0.0));
    }
    let (p_qsvt, fid) = match task {
        Task::Mixed => {
            let r = metrics(spectrum, &SvtFunction::linear_amp_cutoff(p_star.min(1.0))?)?;
            (r.p_qsvt, r.f_qsvt)
        }
        Task::Teleport => {
            let r = teleport_metrics(spectrum, &SvtFunction::inverse_cutoff(p_star.min(1.0))?)?;
            (r.p_succ, r.f_decoding)
        }
    };
    Ok(BoundCheckResult::new(name, BoundKind::Lower, (1.0 - epsilon) * alpha, p_qsvt)
        .with("epsilon", epsilon)
        .with("alpha", alpha)
        .with("fidelity", fid))
}

/// Success bound under approximate error correction: `p_QSVT ≥ (1 − ε'/ε)(1 − ε)`.
/// Fails with a domain error when the spectrum violates the `ε'` condition.
pub fn aqec_bound_check(spectrum: &BranchSpectrum, epsilon: f64, epsilon_prime: f64) -> Result<BoundCheckResult> {
    let c = aqec_check(spectrum, epsilon, epsilon_prime)?;
    if !c.satisfied {
        return Err(Error::Domain(format!("deviation {:.3e} exceeds eps' = {epsilon_prime}", c.deviation)));
    }
    Ok(BoundCheckResult::new("aqec_success_bound", BoundKind::Lower, c.p_qsvt_bound, c.p_qsvt_measured)
        .with("epsilon", epsilon)
        .with("epsilon_prime", epsilon_prime)
        .with("deviation", c.deviation))
}
