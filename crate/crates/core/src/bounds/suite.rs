use super::{
    aqec_bound_check, average_projector, average_projector_monte_carlo, grover_scaling_experiment, loglog_slope,
    multiplicative_error_fidelity_check, projector_with_overlap, tail_bound_check, uhlmann_oracle, BoundCheckResult,
    BoundKind, Task,
};
use crate::linalg::{complete_unitary, cr, max_abs_diff, random_state, rng_for, Mat, Operator, Rng, StateVector};
use crate::protocols::{BranchSpectrum, MixedInstance};
use crate::{Error, Result};
use rand::Rng as _;
use rand_distr::{Distribution, Exp1};

pub const BOUNDS_CSV_HEADER: &str = "check,bound,measured,margin,satisfied";

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Perturbations per multiplicative-error check.
    pub trials: usize,
    /// Random spectra per tail-bound and AQEC check.
    pub spectra: usize,
    pub mc_samples: usize,
    pub mc_dim: usize,
    pub delta: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 2024, trials: 1000, spectra: 100, mc_samples: 10_000, mc_dim: 8, delta: 0.1 }
    }
}

/// Branch probabilities of size `d`, alternately uniform on `(0, 1)` and
/// exponential (Porter–Thomas-like) with a random scale, clipped to `(1e-6, 1]`.
pub fn random_spectrum(d: usize, rng: &mut Rng) -> Result<BranchSpectrum> {
    let values: Vec<f64> = if rng.gen::<bool>() {
        (0..d).map(|_| rng.gen_range(1e-6..1.0)).collect()
    } else {
        let scale = rng.gen_range(0.01..0.3);
        (0..d)
            .map(|_| {
                let e: f64 = Exp1.sample(rng);
                (scale * e).clamp(1e-6, 1.0)
            })
            .collect()
    };
    BranchSpectrum::new(values)
}

/// Near-uniform spectrum for the AQEC bound; returns it with its deviation `ε'`.
fn aqec_spectrum(rng: &mut Rng) -> Result<(BranchSpectrum, f64)> {
    let d = rng.gen_range(2..16);
    let base = rng.gen_range(0.05..0.5);
    let spread = rng.gen_range(0.0..0.6);
    let s = BranchSpectrum::new((0..d).map(|_| base * (1.0 + spread * rng.gen_range(-1.0..1.0))).collect())?;
    let p_m = s.p_m();
    let dev = s.values().iter().map(|p| (p / p_m - 1.0).abs()).sum::<f64>() / (2.0 * d as f64);
    Ok((s, dev))
}

fn worst(name: &str, results: Vec<BoundCheckResult>) -> Result<BoundCheckResult> {
    let count = results.len();
    let mut w = results
        .into_iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .ok_or_else(|| Error::Config(format!("{name}: no cases")))?;
    w.name = name.to_string();
    Ok(w.with("cases", count as f64))
}

/// Two-branch mixed instance on two qubits with `p_am = {p0, p1}` for outcome `|0⟩` on qubit 0.
pub fn two_branch_instance(p0: f64, p1: f64, rng: &mut Rng) -> Result<MixedInstance> {
    // ψ_0 = √p0|00⟩ + √(1−p0)|10⟩, ψ_1 = √p1|01⟩ + √(1−p1)|11⟩ placed on columns |a,0⟩.
    let mut w = Mat::zeros(4, 2);
    w[(0, 0)] = cr(p0.sqrt());
    w[(2, 0)] = cr((1.0 - p0).sqrt());
    w[(1, 1)] = cr(p1.sqrt());
    w[(3, 1)] = cr((1.0 - p1).sqrt());
    let full = complete_unitary(&w, rng)?;
    let mut u = Mat::zeros(4, 4);
    for (col, src) in [(0, 0), (2, 1), (1, 2), (3, 3)] {
        u.set_column(col, &full.column(src));
    }
    Ok(MixedInstance {
        prep_unitary: Operator::square(u, vec![2, 2])?,
        partition: (2, 2),
        target: crate::linalg::Projector::qubit_outcome(2, &[0], &[0])?,
    })
}

/// Every check of the bounds module on seeded random inputs.
pub fn default_suite(cfg: &SuiteConfig) -> Result<Vec<BoundCheckResult>> {
    let mut out = Vec::new();

    // Average projector: trace identity and Haar Monte Carlo.
    let mut rng = rng_for(cfg.seed, 1);
    let d = cfg.mc_dim;
    let psi = StateVector::new(random_state(d, &mut rng), vec![d])?;
    let (p_m, d_m) = (0.3, 3.min(d - 1));
    let avg = average_projector(&psi, p_m, d_m)?;
    out.push(BoundCheckResult::new(
        "average_projector_trace",
        BoundKind::Upper,
        1e-12,
        (avg.trace().re - d_m as f64).abs(),
    ));
    let proj = projector_with_overlap(&psi, p_m, d_m, &mut rng)?;
    let mc = average_projector_monte_carlo(&psi, &proj, cfg.mc_samples, &mut rng)?;
    out.push(
        BoundCheckResult::new(
            "average_projector_mc",
            BoundKind::Upper,
            5.0 / (cfg.mc_samples as f64).sqrt(),
            max_abs_diff(mc.mat(), avg.mat()),
        )
        .with("samples", cfg.mc_samples as f64)
        .with("dim", d as f64),
    );

    // Grover scaling.
    let eps = 0.02;
    let quarter = grover_scaling_experiment(&[0.25], eps)?[0];
    out.push(BoundCheckResult::new(
        "grover_quarter_one_step",
        BoundKind::Upper,
        1.0,
        quarter.iterations.map_or(f64::INFINITY, |k| k as f64),
    ));
    let single = grover_scaling_experiment(&[1e-3], eps)?[0];
    let rel = single.iterations.map_or(f64::INFINITY, |k| (k as f64 / single.predicted - 1.0).abs());
    out.push(
        BoundCheckResult::new("grover_1e-3_within_20pct", BoundKind::Upper, 0.2, rel)
            .with("predicted", single.predicted),
    );
    let grid: Vec<f64> = (0..9).map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / 8.0)).collect();
    let points = grover_scaling_experiment(&grid, eps)?;
    let worst_fit = points
        .iter()
        .map(|g| g.iterations.map_or(f64::INFINITY, |k| (k as f64 / g.predicted - 1.0).abs()))
        .fold(0.0, f64::max);
    out.push(BoundCheckResult::new("grover_fit_within_20pct", BoundKind::Upper, 0.2, worst_fit));
    let slope = loglog_slope(&points)?;
    out.push(BoundCheckResult::new("grover_slope_min", BoundKind::Lower, -0.55, slope));
    out.push(BoundCheckResult::new("grover_slope_max", BoundKind::Upper, -0.45, slope));

    // Multiplicative error.
    let mut rng = rng_for(cfg.seed, 2);
    for task in [Task::Mixed, Task::Teleport] {
        let s = random_spectrum(16, &mut rng)?;
        out.push(multiplicative_error_fidelity_check(&s, cfg.delta, cfg.trials, task, &mut rng)?);
    }

    // Tail bounds and the AQEC bound.
    let mut rng = rng_for(cfg.seed, 3);
    for (task, name) in [(Task::Mixed, "tail_bound_mixed"), (Task::Teleport, "tail_bound_teleport")] {
        let mut cases = Vec::with_capacity(cfg.spectra);
        for _ in 0..cfg.spectra {
            let dim = rng.gen_range(2..64);
            let s = random_spectrum(dim, &mut rng)?;
            let e = rng.gen_range(0.02..0.9);
            cases.push(tail_bound_check(&s, e, task)?);
        }
        out.push(worst(name, cases)?);
    }
    let mut cases = Vec::with_capacity(cfg.spectra);
    for _ in 0..cfg.spectra {
        let (s, dev) = aqec_spectrum(&mut rng)?;
        let e = rng.gen_range((dev + 1e-3).min(0.98)..0.99);
        cases.push(aqec_bound_check(&s, e, dev)?);
    }
    out.push(worst("aqec_success_bound", cases)?);

    // Uhlmann oracle on the two-branch instance.
    let mut rng = rng_for(cfg.seed, 4);
    let oracle = uhlmann_oracle(&two_branch_instance(0.1, 0.4, &mut rng)?)?;
    out.push(BoundCheckResult::new(
        "uhlmann_dual_path",
        BoundKind::Upper,
        1e-9,
        (oracle.from_states - oracle.from_spectrum).abs(),
    ));
    out.push(BoundCheckResult::new(
        "uhlmann_two_branch_value",
        BoundKind::Upper,
        1e-12,
        (oracle.from_spectrum - 0.9).abs(),
    ));
    Ok(out)
}
