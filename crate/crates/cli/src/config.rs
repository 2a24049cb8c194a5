//! Flat `key = value` experiment configuration.

use crate::CliError;
use std::path::PathBuf;

/// Experiments the CLI knows how to run.
pub const EXPERIMENTS: [&str; 6] = ["fig4", "fig6", "fpaa", "gadget-check", "bounds", "protocol"];

/// Every configuration key; each is also a `--key VALUE` flag.
pub const KEYS: [&str; 27] = [
    "experiment",
    "n_total",
    "n_mixed",
    "n_measured",
    "source",
    "spectrum",
    "normal_mean",
    "normal_std",
    "normal_count",
    "grid_min",
    "grid_max",
    "grid_points",
    "seed",
    "out",
    "fpaa_p_m",
    "fpaa_p_star",
    "fpaa_delta",
    "fpaa_instances",
    "gadget_circuits",
    "gadget_qubits",
    "gadget_layers",
    "gadget_meas",
    "bounds_trials",
    "bounds_spectra",
    "protocol_qubits",
    "protocol_mixed",
    "protocol_measured",
];

/// Largest qubit count for the isometry (spectrum) tier.
pub const ISOMETRY_TIER_QUBITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 14 qubits, 7 maximally mixed, 8 measured.
    Paper,
    /// 10 qubits, 5 maximally mixed, 6 measured.
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "paper" => Ok(Self::Paper),
            "desk" => Ok(Self::Desk),
            _ => Err(CliError::Usage(format!("unknown preset '{s}' (expected paper or desk)"))),
        }
    }
}

/// Where the branch probabilities `p_am` come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    /// Haar isometry on `n_total` qubits with `n_mixed` maximally mixed inputs,
    /// post-selected on `n_measured` qubits.
    HaarIsometry,
    /// i.i.d. normal values truncated to `(1e-6, 1)`.
    IidNormal {
        mean: f64,
        std: f64,
        count: usize,
    },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n_total: usize,
    pub n_mixed: usize,
    pub n_measured: usize,
    pub source: SpectrumSource,
    /// Source of the comparison panel in the figure commands.
    pub normal: SpectrumSource,
    pub p_star_grid: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub fpaa_p_m: f64,
    pub fpaa_p_star: f64,
    pub fpaa_delta: f64,
    pub fpaa_instances: usize,
    pub gadget_circuits: usize,
    pub gadget_qubits: usize,
    pub gadget_layers: usize,
    pub gadget_meas: usize,
    pub bounds_trials: usize,
    pub bounds_spectra: usize,
    pub protocol_qubits: usize,
    pub protocol_mixed: usize,
    pub protocol_measured: usize,
}

// Raw values before the grid and sources are assembled.
#[derive(Debug, Clone)]
struct Raw {
    source: String,
    spectrum: Vec<f64>,
    normal_mean: f64,
    normal_std: f64,
    normal_count: usize,
    grid_min: f64,
    grid_max: f64,
    grid_points: usize,
}

/// Builds a config from a preset, then applies `key = value` pairs in order.
pub fn build_config(
    experiment: &str,
    preset: Preset,
    pairs: &[(String, String)],
) -> Result<ExperimentConfig, CliError> {
    let (n_total, n_mixed, n_measured) = match preset {
        Preset::Paper => (14, 7, 8),
        Preset::Desk => (10, 5, 6),
    };
    let mut cfg = ExperimentConfig {
        experiment: experiment.to_string(),
        n_total,
        n_mixed,
        n_measured,
        source: SpectrumSource::HaarIsometry,
        normal: SpectrumSource::IidNormal { mean: 0.05, std: 0.015, count: 2048 },
        p_star_grid: Vec::new(),
        seed: 1,
        out: PathBuf::from("out"),
        fpaa_p_m: 0.3,
        fpaa_p_star: 0.25,
        fpaa_delta: 0.01,
        fpaa_instances: 50,
        gadget_circuits: 50,
        gadget_qubits: 4,
        gadget_layers: 4,
        gadget_meas: 4,
        bounds_trials: 1000,
        bounds_spectra: 100,
        protocol_qubits: 6,
        protocol_mixed: 2,
        protocol_measured: 2,
    };
    let mut raw = Raw {
        source: "haar_isometry".into(),
        spectrum: Vec::new(),
        normal_mean: 0.05,
        normal_std: 0.015,
        normal_count: 2048,
        grid_min: 1e-7,
        grid_max: 1.0,
        grid_points: 71,
    };
    for (key, value) in pairs {
        apply(&mut cfg, &mut raw, key, value)?;
    }
    if !EXPERIMENTS.contains(&cfg.experiment.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown experiment '{}' (expected one of {})",
            cfg.experiment,
            EXPERIMENTS.join(", ")
        )));
    }
    cfg.normal = SpectrumSource::IidNormal { mean: raw.normal_mean, std: raw.normal_std, count: raw.normal_count };
    cfg.source = match raw.source.as_str() {
        "haar_isometry" => SpectrumSource::HaarIsometry,
        "iid_normal" => cfg.normal.clone(),
        "explicit" => SpectrumSource::Explicit(raw.spectrum.clone()),
        other => return Err(CliError::Config(format!("unknown source '{other}'"))),
    };
    cfg.p_star_grid = log_grid(raw.grid_min, raw.grid_max, raw.grid_points)?;
    validate(&cfg)?;
    Ok(cfg)
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) || points == 0 {
        return Err(CliError::Config(format!(
            "p_star grid needs 0 < grid_min <= grid_max <= 1, got [{lo}, {hi}] x {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![hi]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    let mut grid: Vec<f64> = (0..points).map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64)).collect();
    // Pin the endpoints so `grid_max = 1` lands on exactly 1.
    grid[0] = lo;
    grid[points - 1] = hi;
    Ok(grid)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.n_mixed == 0 || cfg.n_measured == 0 || cfg.n_mixed > cfg.n_total || cfg.n_measured > cfg.n_total {
        return Err(CliError::Config(format!(
            "qubit counts need 1 <= n_mixed, n_measured <= n_total, got {}/{}/{}",
            cfg.n_total, cfg.n_mixed, cfg.n_measured
        )));
    }
    if cfg.n_total > ISOMETRY_TIER_QUBITS {
        return Err(CliError::Config(format!(
            "{} qubits exceeds the {ISOMETRY_TIER_QUBITS}-qubit isometry tier; try --preset desk",
            cfg.n_total
        )));
    }
    if !(cfg.fpaa_delta > 0.0 && cfg.fpaa_delta < 1.0)
        || !(cfg.fpaa_p_star > 0.0 && cfg.fpaa_p_star <= cfg.fpaa_p_m && cfg.fpaa_p_m <= 1.0)
    {
        return Err(CliError::Config("fpaa needs 0 < fpaa_p_star <= fpaa_p_m <= 1 and 0 < fpaa_delta < 1".into()));
    }
    if let SpectrumSource::IidNormal { std, count, .. } = cfg.normal {
        if std < 0.0 || count == 0 {
            return Err(CliError::Config("normal source needs std >= 0 and count >= 1".into()));
        }
    }
    if let SpectrumSource::Explicit(v) = &cfg.source {
        if v.is_empty() || v.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CliError::Config("explicit spectrum needs values in [0, 1]".into()));
        }
    }
    Ok(())
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse '{value}'")))
}

fn apply(cfg: &mut ExperimentConfig, raw: &mut Raw, key: &str, value: &str) -> Result<(), CliError> {
    match key {
        "experiment" => cfg.experiment = value.to_string(),
        "n_total" => cfg.n_total = number(key, value)?,
        "n_mixed" => cfg.n_mixed = number(key, value)?,
        "n_measured" => cfg.n_measured = number(key, value)?,
        "source" => raw.source = value.to_string(),
        "spectrum" => {
            raw.spectrum = value.split(',').map(|v| number(key, v.trim())).collect::<Result<_, _>>()?;
        }
        "normal_mean" => raw.normal_mean = number(key, value)?,
        "normal_std" => raw.normal_std = number(key, value)?,
        "normal_count" => raw.normal_count = number(key, value)?,
        "grid_min" => raw.grid_min = number(key, value)?,
        "grid_max" => raw.grid_max = number(key, value)?,
        "grid_points" => raw.grid_points = number(key, value)?,
        "seed" => cfg.seed = number(key, value)?,
        "out" => cfg.out = PathBuf::from(value),
        "fpaa_p_m" => cfg.fpaa_p_m = number(key, value)?,
        "fpaa_p_star" => cfg.fpaa_p_star = number(key, value)?,
        "fpaa_delta" => cfg.fpaa_delta = number(key, value)?,
        "fpaa_instances" => cfg.fpaa_instances = number(key, value)?,
        "gadget_circuits" => cfg.gadget_circuits = number(key, value)?,
        "gadget_qubits" => cfg.gadget_qubits = number(key, value)?,
        "gadget_layers" => cfg.gadget_layers = number(key, value)?,
        "gadget_meas" => cfg.gadget_meas = number(key, value)?,
        "bounds_trials" => cfg.bounds_trials = number(key, value)?,
        "bounds_spectra" => cfg.bounds_spectra = number(key, value)?,
        "protocol_qubits" => cfg.protocol_qubits = number(key, value)?,
        "protocol_mixed" => cfg.protocol_mixed = number(key, value)?,
        "protocol_measured" => cfg.protocol_measured = number(key, value)?,
        _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
    }
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key '{key}'", i + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}
