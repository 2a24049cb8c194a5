//! Branch spectra for the figure commands.

use crate::config::{ExperimentConfig, SpectrumSource};
use crate::CliError;
use postsel::linalg::{haar_isometry, rng_for, Rng};
use postsel::protocols::{branch_spectrum_qubits, BranchSpectrum};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

const TRUNC_LO: f64 = 1e-6;
const MAX_REJECTIONS: usize = 1_000_000;

/// Stream ids keep the two panels independent of each other.
const HAAR_STREAM: u64 = 11;
const NORMAL_STREAM: u64 = 12;

/// A spectrum and a short description of where it came from.
#[derive(Debug, Clone)]
pub struct SampledSpectrum {
    pub spectrum: BranchSpectrum,
    pub label: String,
}

pub fn sample(source: &SpectrumSource, cfg: &ExperimentConfig) -> Result<SampledSpectrum, CliError> {
    match source {
        SpectrumSource::HaarIsometry => {
            let mut rng = rng_for(cfg.seed, HAAR_STREAM);
            let (spectrum, outcome) = haar_spectrum(cfg.n_total, cfg.n_mixed, cfg.n_measured, &mut rng)?;
            let bits: String = outcome.iter().map(|b| char::from(b'0' + b)).collect();
            Ok(SampledSpectrum {
                spectrum,
                label: format!("haar {}q/{} mixed/{} measured, m={bits}", cfg.n_total, cfg.n_mixed, cfg.n_measured),
            })
        }
        SpectrumSource::IidNormal { mean, std, count } => {
            let mut rng = rng_for(cfg.seed, NORMAL_STREAM);
            let values = truncated_normal(*mean, *std, *count, &mut rng)?;
            Ok(SampledSpectrum {
                spectrum: BranchSpectrum::new(values)?,
                label: format!("iid normal({mean}, {std}) x {count}"),
            })
        }
        SpectrumSource::Explicit(values) => Ok(SampledSpectrum {
            spectrum: BranchSpectrum::new(values.clone())?,
            label: format!("explicit x {}", values.len()),
        }),
    }
}

/// `p_am` of a Haar isometry from `n_mixed` input qubits into `n_total`,
/// post-selected on the first `n_measured` qubits at a uniformly drawn outcome.
pub fn haar_spectrum(
    n_total: usize,
    n_mixed: usize,
    n_measured: usize,
    rng: &mut Rng,
) -> Result<(BranchSpectrum, Vec<u8>), CliError> {
    let iso = haar_isometry(1 << n_total, 1 << n_mixed, rng)?;
    let outcome: Vec<u8> = (0..n_measured).map(|_| rng.gen_range(0..2)).collect();
    let measured: Vec<usize> = (0..n_measured).collect();
    Ok((branch_spectrum_qubits(&iso, &measured, &outcome)?, outcome))
}

/// Normal draws rejected outside `(1e-6, 1)`.
pub fn truncated_normal(mean: f64, std: f64, count: usize, rng: &mut Rng) -> Result<Vec<f64>, CliError> {
    let normal = Normal::new(mean, std).map_err(|e| CliError::Config(format!("normal source: {e}")))?;
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0;
    while out.len() < count {
        let x = normal.sample(rng);
        if x > TRUNC_LO && x < 1.0 {
            out.push(x);
        } else {
            rejected += 1;
            if rejected > MAX_REJECTIONS {
                return Err(CliError::Config(format!("normal({mean}, {std}) has almost no mass in (1e-6, 1)")));
            }
        }
    }
    Ok(out)
}

/// Equal-width histogram of `values` over `[0, max]` as `(lo, hi, count)`.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let width = if max > 0.0 { max / bins as f64 } else { 1.0 };
    let mut counts = vec![0; bins];
    for &v in values {
        counts[((v / width) as usize).min(bins - 1)] += 1;
    }
    counts.into_iter().enumerate().map(|(i, c)| (i as f64 * width, (i + 1) as f64 * width, c)).collect()
}

/// Nearest-rank quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}
