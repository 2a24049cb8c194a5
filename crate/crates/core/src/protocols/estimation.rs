use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;

use super::ensemble::{fpaa_phases, fpaa_prepare_with, project_ensemble};
use crate::blockenc::postselect_encoding;
use crate::linalg::{reduced_density, rng_for, Operator, Rng, StateVector};
use crate::{Error, Result};

/// A single-shot protocol taking `arity()` copies of a state whose average
/// outcome is an unbiased estimate of some k-copy expectation value.
pub trait KCopyEstimator {
    fn arity(&self) -> usize;
    fn sample(&self, copies: &[&StateVector], rng: &mut Rng) -> Result<f64>;
    /// The exact mean of `sample` on these copies.
    fn expectation(&self, copies: &[&StateVector]) -> Result<f64>;
}

/// Subsystem purity through the SWAP test on two copies.
#[derive(Debug, Clone)]
pub struct SwapTestPurity {
    /// Indices into the state's subsystem dims that make up `A`.
    pub subsystem: Vec<usize>,
}

/// `(1 + tr ρ_A σ_A) / 2`.
pub fn swap_test_accept_probability(a: &StateVector, b: &StateVector, subsystem: &[usize]) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Dimension(format!("copies on {:?} and {:?}", a.dims(), b.dims())));
    }
    let rho = reduced_density(a.amps(), a.dims(), subsystem)?;
    let sigma = reduced_density(b.amps(), b.dims(), subsystem)?;
    let overlap = (rho * sigma).trace().re;
    Ok(((1.0 + overlap) / 2.0).clamp(0.5, 1.0))
}

/// One SWAP-test shot: `+1` on accept, `-1` on reject.
pub fn swap_test_purity(a: &StateVector, b: &StateVector, subsystem: &[usize], rng: &mut Rng) -> Result<i8> {
    let p = swap_test_accept_probability(a, b, subsystem)?;
    Ok(if rng.gen::<f64>() < p { 1 } else { -1 })
}

impl KCopyEstimator for SwapTestPurity {
    fn arity(&self) -> usize {
        2
    }

    fn sample(&self, copies: &[&StateVector], rng: &mut Rng) -> Result<f64> {
        Ok(swap_test_purity(copies[0], copies[1], &self.subsystem, rng)? as f64)
    }

    fn expectation(&self, copies: &[&StateVector]) -> Result<f64> {
        Ok(2.0 * swap_test_accept_probability(copies[0], copies[1], &self.subsystem)? - 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct EstimationConfig {
    /// Number of copies the estimator consumes.
    pub k: usize,
    pub p_star: f64,
    /// FPAA error; `0` substitutes an ideal amplifier that always succeeds.
    pub delta: f64,
    /// Accepted estimator samples to collect.
    pub budget: usize,
    pub seed: u64,
}

impl EstimationConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("moment order k = {} < 2", self.k)));
        }
        if self.budget == 0 {
            return Err(Error::Config("sample budget must be positive".into()));
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta = {}", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub estimate: f64,
    pub stderr: f64,
    /// Failed flag measurements over all FPAA attempts.
    pub flag_fail_rate: f64,
    pub attempts: usize,
    pub failures: usize,
    /// `Σ_m p_m ⟨O⟩_m` computed exactly, for reference.
    pub exact: f64,
}

struct Branch {
    probability: f64,
    measured: StateVector,
    amplified: StateVector,
    flag: f64,
}

/// Post-selection-free estimation of `Σ_m p_m ⟨O⟩_m` for the state `prep |0…0⟩`.
///
/// Each accepted sample measures once to pick `m`, then prepares `k − 1`
/// further copies by FPAA; a failed flag restarts from the measurement.
pub fn estimate_nonlinear(
    prep: &Operator,
    measured_qubits: &[usize],
    estimator: &dyn KCopyEstimator,
    cfg: &EstimationConfig,
) -> Result<EstimationResult> {
    cfg.validate()?;
    if estimator.arity() != cfg.k {
        return Err(Error::Config(format!("estimator takes {} copies, k = {}", estimator.arity(), cfg.k)));
    }
    if !prep.is_square() {
        return Err(Error::Dimension("preparation must be square".into()));
    }
    let psi = StateVector::new(prep.mat().column(0).into_owned(), prep.row_dims().to_vec())?;
    let ensemble = project_ensemble(&psi, measured_qubits)?;
    let phases = if cfg.delta > 0.0 { Some(fpaa_phases(cfg.p_star, cfg.delta)?) } else { None };
    let mut branches = Vec::with_capacity(ensemble.entries.len());
    for e in ensemble.entries {
        let (amplified, flag) = match &phases {
            Some(ph) => {
                let enc = postselect_encoding(prep, &e.projector)?;
                let out = fpaa_prepare_with(&enc, ph)?;
                (out.state, out.flag_probability)
            }
            None => (e.state.clone(), 1.0),
        };
        branches.push(Branch { probability: e.probability, measured: e.state, amplified, flag });
    }

    let mut exact = 0.0;
    for b in &branches {
        let mut copies = vec![&b.measured];
        copies.extend(std::iter::repeat_n(&b.measured, cfg.k - 1));
        exact += b.probability * estimator.expectation(&copies)?;
    }

    let weights = WeightedIndex::new(branches.iter().map(|b| b.probability))
        .map_err(|e| Error::Degenerate(format!("outcome distribution: {e}")))?;
    let mut rng = rng_for(cfg.seed, 0);
    let max_attempts = cfg.budget.saturating_mul(10_000);
    let (mut attempts, mut failures) = (0usize, 0usize);
    let mut samples = Vec::with_capacity(cfg.budget);
    while samples.len() < cfg.budget {
        let b = &branches[weights.sample(&mut rng)];
        let mut ok = true;
        for _ in 1..cfg.k {
            attempts += 1;
            if rng.gen::<f64>() >= b.flag {
                failures += 1;
                ok = false;
                break;
            }
        }
        if attempts > max_attempts {
            return Err(Error::Degenerate(format!("{failures} flag failures in {attempts} attempts")));
        }
        if !ok {
            continue;
        }
        let mut copies = vec![&b.measured];
        copies.extend(std::iter::repeat_n(&b.amplified, cfg.k - 1));
        samples.push(estimator.sample(&copies, &mut rng)?);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 { samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(EstimationResult {
        estimate: mean,
        stderr: (var / n).sqrt(),
        flag_fail_rate: failures as f64 / attempts.max(1) as f64,
        attempts,
        failures,
        exact,
    })
}
