use crate::config::ExperimentConfig;
use crate::plot::{self, PlotPanel};
use crate::report::{write_assertions, write_rows, Assertion, RunSummary};
use crate::spectra::{histogram, quantile, sample, SampledSpectrum};
use crate::CliError;
use postsel::decoders::{teleport_metrics, DecoderReport, DECODER_CSV_HEADER};
use postsel::protocols::{metrics, BranchSpectrum, MetricsReport, METRICS_CSV_HEADER};
use postsel::svtfun::SvtFunction;
use postsel::tol;
use std::fs;

const HIST_BINS: usize = 40;
type Histogram = Vec<(f64, f64, usize)>;

const HIST_HEADER: &str = "bin_lo,bin_hi,count";
const EXACT: f64 = 1e-10;
const HIGH_FIDELITY: f64 = 0.99;

/// Ideal LAA (`f(x) = min(x/√p*, 1)`) over the grid.
pub fn laa_curve(spectrum: &BranchSpectrum, grid: &[f64]) -> Result<Vec<(f64, MetricsReport)>, CliError> {
    grid.iter().map(|&p| Ok((p, metrics(spectrum, &SvtFunction::linear_amp(p)?)?))).collect()
}

/// Ideal pseudoinverse decoder (truncated inverse) over the grid.
pub fn decoder_curve(spectrum: &BranchSpectrum, grid: &[f64]) -> Result<Vec<(f64, DecoderReport)>, CliError> {
    grid.iter().map(|&p| Ok((p, teleport_metrics(spectrum, &SvtFunction::trunc_inverse(p)?)?))).collect()
}

/// Largest success probability among grid points whose fidelity reaches `threshold`.
pub fn best_success<'a>(points: impl Iterator<Item = (f64, f64)> + 'a, threshold: f64) -> f64 {
    points.filter(|&(f, _)| f >= threshold).map(|(_, p)| p).fold(0.0, f64::max)
}

fn max_or<I: Iterator<Item = f64>>(it: I, empty: f64) -> f64 {
    it.reduce(f64::max).unwrap_or(empty)
}

pub fn laa_assertions(
    tag: &str,
    spectrum: &BranchSpectrum,
    rows: &[(f64, MetricsReport)],
) -> Result<Vec<Assertion>, CliError> {
    let p_max = spectrum.p_max();
    let f_uhl = metrics(spectrum, &SvtFunction::Sign)?;
    let mut out = vec![Assertion::at_most(
        format!("{tag}_f_qsvt_unity_above_p_max"),
        max_or(rows.iter().filter(|(p, _)| *p >= p_max).map(|(_, r)| (r.f_qsvt - 1.0).abs()), f64::INFINITY),
        EXACT,
    )];
    if let Some((_, r)) = rows.iter().find(|(p, _)| *p == 1.0) {
        out.push(Assertion::at_most(
            format!("{tag}_naive_postselection_at_p_star_1"),
            (r.p_qsvt - spectrum.p_m()).abs().max((r.f_qsvt - 1.0).abs()),
            1e-12,
        ));
    }
    out.push(Assertion::at_most(
        format!("{tag}_f_overall_non_increasing"),
        max_or(rows.windows(2).map(|w| w[1].1.f_overall - w[0].1.f_overall), 0.0),
        1e-12,
    ));
    out.push(Assertion::at_most(
        format!("{tag}_f_overall_below_uhlmann"),
        max_or(rows.iter().map(|(_, r)| r.f_overall - r.f_uhlmann), 0.0),
        1e-12,
    ));
    let first = rows.first().ok_or_else(|| CliError::Config("empty p_star grid".into()))?;
    out.push(Assertion::at_most(
        format!("{tag}_smallest_p_star_reaches_uhlmann"),
        (first.1.f_overall - first.1.f_uhlmann).abs(),
        1e-9,
    ));
    out.push(Assertion::at_most(
        format!("{tag}_sign_limit_equals_uhlmann"),
        (f_uhl.f_overall - f_uhl.f_uhlmann).abs(),
        1e-9,
    ));
    Ok(out)
}

/// Exact inversion, linear success probability and high fidelity below the
/// 10th percentile. A non-injective spectrum (some `p_am = 0`) has no such
/// regime; there the fidelity is only checked against its cap `rank/d_R`.
pub fn decoder_assertions(tag: &str, spectrum: &BranchSpectrum, rows: &[(f64, DecoderReport)]) -> Vec<Assertion> {
    let (p_min, p_m) = (spectrum.p_min(), spectrum.p_m());
    let rank = spectrum.values().iter().filter(|&&p| p >= tol::DEGENERATE).count();
    if rank < spectrum.d_r() {
        let cap = rank as f64 / spectrum.d_r() as f64;
        return vec![Assertion::with_relation(
            format!("{tag}_non_injective_fidelity_capped_by_rank"),
            format!("<= {cap} (rank {rank} of {})", spectrum.d_r()),
            max_or(rows.iter().map(|(_, r)| r.f_decoding), 0.0),
            rows.iter().all(|(_, r)| r.f_decoding <= cap + 1e-12),
        )];
    }
    let below: Vec<&(f64, DecoderReport)> = rows.iter().filter(|(p, _)| *p <= p_min).collect();
    let mut out = vec![
        Assertion::at_most(
            format!("{tag}_exact_inversion_below_p_min"),
            max_or(below.iter().map(|(_, r)| (r.f_decoding - 1.0).abs()), f64::INFINITY),
            EXACT,
        ),
        Assertion::at_most(
            format!("{tag}_p_succ_linear_below_p_min"),
            max_or(below.iter().map(|(p, r)| (r.p_succ - p / p_m).abs()), f64::INFINITY),
            EXACT,
        ),
    ];
    let q10 = quantile(spectrum.values(), 0.1);
    let low: Vec<f64> = rows.iter().filter(|(p, _)| *p <= q10).map(|(_, r)| r.f_decoding).collect();
    let min_f = low.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(Assertion::with_relation(
        format!("{tag}_high_fidelity_below_10th_percentile"),
        format!(">= {HIGH_FIDELITY} for p* <= {q10:e}"),
        if low.is_empty() { f64::NAN } else { min_f },
        !low.is_empty() && min_f >= HIGH_FIDELITY,
    ));
    // Least-squares slope of p_succ against p* below p_min.
    let n = below.len() as f64;
    let slope = if below.len() >= 2 {
        let mx = below.iter().map(|(p, _)| p).sum::<f64>() / n;
        let my = below.iter().map(|(_, r)| r.p_succ).sum::<f64>() / n;
        let sxx: f64 = below.iter().map(|(p, _)| (p - mx).powi(2)).sum();
        below.iter().map(|(p, r)| (p - mx) * (r.p_succ - my)).sum::<f64>() / sxx
    } else {
        f64::NAN
    };
    out.push(Assertion::with_relation(
        format!("{tag}_p_succ_slope_is_inverse_p_m"),
        format!("within 1e-6 relative of {:e}", 1.0 / p_m),
        slope,
        slope > 0.0 && (slope * p_m - 1.0).abs() <= 1e-6,
    ));
    out
}

fn comparison(name: &str, best_a: f64, best_b: f64) -> Assertion {
    Assertion::with_relation(name, format!("> 0 (b {best_b:.6} vs a {best_a:.6})"), best_b - best_a, best_b > best_a)
}

fn panels(cfg: &ExperimentConfig) -> Result<[(&'static str, SampledSpectrum); 2], CliError> {
    Ok([("a", sample(&cfg.source, cfg)?), ("b", sample(&cfg.normal, cfg)?)])
}

fn write_histogram(
    cfg: &ExperimentConfig,
    name: &str,
    spectrum: &BranchSpectrum,
) -> Result<(std::path::PathBuf, Histogram), CliError> {
    let hist = histogram(spectrum.values(), HIST_BINS);
    let rows: Vec<String> = hist.iter().map(|(lo, hi, c)| format!("{lo:e},{hi:e},{c}")).collect();
    Ok((write_rows(&cfg.out.join(name), HIST_HEADER, &rows)?, hist))
}

/// Mixed-state post-selection by ideal LAA on the configured source (panel a)
/// and the i.i.d. normal source (panel b).
pub fn fig4(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&cfg.out)?;
    let mut summary = RunSummary::default();
    let mut plots = Vec::new();
    let mut best = Vec::new();
    for (tag, s) in panels(cfg)? {
        let rows = laa_curve(&s.spectrum, &cfg.p_star_grid)?;
        let lines: Vec<String> = rows.iter().map(|(p, r)| r.csv_row(*p)).collect();
        summary.files.push(write_rows(&cfg.out.join(format!("fig4{tag}.csv")), METRICS_CSV_HEADER, &lines)?);
        let (file, hist) = write_histogram(cfg, &format!("fig4{tag}_hist.csv"), &s.spectrum)?;
        summary.files.push(file);
        summary.assertions.extend(laa_assertions(tag, &s.spectrum, &rows)?);
        best.push(best_success(rows.iter().map(|(_, r)| (r.f_qsvt, r.p_qsvt)), HIGH_FIDELITY));
        plots.push(PlotPanel {
            title: format!("({tag}) {}", s.label),
            series: vec![
                ("F_QSVT", rows.iter().map(|(p, r)| (*p, r.f_qsvt)).collect()),
                ("p_QSVT", rows.iter().map(|(p, r)| (*p, r.p_qsvt)).collect()),
                ("F_overall", rows.iter().map(|(p, r)| (*p, r.f_overall)).collect()),
                ("F_Uhlmann", rows.iter().map(|(p, r)| (*p, r.f_uhlmann)).collect()),
            ],
            histogram: hist,
        });
    }
    summary.assertions.push(comparison("b_higher_p_qsvt_at_f_0.99", best[0], best[1]));
    summary.files.push(plot::figure(&cfg.out.join("fig4.svg"), &plots)?);
    summary.files.push(write_assertions(&cfg.out.join("fig4_assertions.csv"), &summary.assertions)?);
    Ok(summary)
}

/// Pseudoinverse decoder with the ideal truncated inverse on the same two sources.
pub fn fig6(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&cfg.out)?;
    let mut summary = RunSummary::default();
    let mut plots = Vec::new();
    let mut best = Vec::new();
    for (tag, s) in panels(cfg)? {
        let rows = decoder_curve(&s.spectrum, &cfg.p_star_grid)?;
        let lines: Vec<String> = rows.iter().map(|(p, r)| r.csv_row("pseudoinverse", Some(*p))).collect();
        summary.files.push(write_rows(&cfg.out.join(format!("fig6{tag}.csv")), DECODER_CSV_HEADER, &lines)?);
        let (file, hist) = write_histogram(cfg, &format!("fig6{tag}_hist.csv"), &s.spectrum)?;
        summary.files.push(file);
        summary.assertions.extend(decoder_assertions(tag, &s.spectrum, &rows));
        best.push(best_success(rows.iter().map(|(_, r)| (r.f_decoding, r.p_succ)), HIGH_FIDELITY));
        plots.push(PlotPanel {
            title: format!("({tag}) {}", s.label),
            series: vec![
                ("F_QSVT", rows.iter().map(|(p, r)| (*p, r.f_decoding)).collect()),
                ("p_QSVT", rows.iter().map(|(p, r)| (*p, r.p_succ)).collect()),
                ("F_overall", rows.iter().map(|(p, r)| (*p, r.f_overall)).collect()),
                ("F_Uhlmann", rows.iter().map(|(p, r)| (*p, r.f_uhlmann)).collect()),
            ],
            histogram: hist,
        });
    }
    summary.assertions.push(comparison("b_higher_p_succ_at_f_0.99", best[0], best[1]));
    summary.files.push(plot::figure(&cfg.out.join("fig6.svg"), &plots)?);
    summary.files.push(write_assertions(&cfg.out.join("fig6_assertions.csv"), &summary.assertions)?);
    Ok(summary)
}
