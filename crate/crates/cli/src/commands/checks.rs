use crate::config::ExperimentConfig;
use crate::report::{write_assertions, write_rows, Assertion, RunSummary};
use crate::CliError;
use postsel::blockenc::{
    compression_gadget_encoding, postselect_encoding, swap_deferral_encoding, BlockEncoding, HybridCircuit,
};
use postsel::bounds::{default_suite, SuiteConfig, BOUNDS_CSV_HEADER};
use postsel::decoders::{pseudoinverse_circuit, teleport_metrics, TeleportInstance};
use postsel::linalg::{
    complete_unitary, cr, haar_unitary, max_abs_diff, random_state, rng_for, Mat, Operator, Projector, Rng, Vector,
};
use postsel::protocols::{branch_spectrum, fpaa_prepare, laa_simulate, metrics, MixedInstance};
use postsel::svtfun::SvtFunction;
use rand::Rng as _;
use std::fs;

const FPAA_HEADER: &str = "instance,n_qubits,p_m,p_star,delta,fidelity,flag_failure";
const GADGET_HEADER: &str = "circuit,n_qubits,n_meas,kraus_vs_swap,kraus_vs_gadget,swap_vs_gadget";
const PROTOCOL_HEADER: &str = "task,p_star,f_circuit,f_formula,p_circuit,p_formula";
const GADGET_TOL: f64 = 1e-10;
const CIRCUIT_FORMULA_TOL: f64 = 1e-8;
const PROTOCOL_DELTA: f64 = 1e-2;
const MAX_CIRCUIT_DRAWS: usize = 1000;
const NONVANISHING: f64 = 1e-6;

/// State-preparation instance on `n` qubits with `p_m` on qubit 0 reading 0,
/// and the normalized post-selected state.
pub fn fpaa_instance(n: usize, p_m: f64, rng: &mut Rng) -> Result<(BlockEncoding, Vector), CliError> {
    let half = 1 << (n - 1);
    let mut good = Vector::zeros(2 * half);
    good.rows_mut(0, half).copy_from(&random_state(half, rng));
    let mut bad = Vector::zeros(2 * half);
    bad.rows_mut(half, half).copy_from(&random_state(half, rng));
    let psi = &good * cr(p_m.sqrt()) + &bad * cr((1.0 - p_m).sqrt());
    let u = complete_unitary(&Mat::from_column_slice(2 * half, 1, psi.as_slice()), rng)?;
    let enc = postselect_encoding(&Operator::square(u, vec![2; n])?, &Projector::qubit_outcome(n, &[0], &[0])?)?;
    Ok((enc, good))
}

/// Output fidelity and flag-failure probability of FPAA on one instance.
pub fn fpaa_trial(enc: &BlockEncoding, ideal: &Vector, p_star: f64, delta: f64) -> Result<(f64, f64), CliError> {
    let out = fpaa_prepare(enc, p_star, delta)?;
    Ok((ideal.dotc(out.state.amps()).norm_sqr(), 1.0 - out.flag_probability))
}

/// The configured instance first, then random ones on 2 to 8 qubits with `p_m ∈ [p*, 1]`.
pub fn fpaa(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&cfg.out)?;
    let mut rng = rng_for(cfg.seed, 21);
    let (p_star, delta) = (cfg.fpaa_p_star, cfg.fpaa_delta);
    let mut rows = Vec::new();
    let (mut worst_f, mut worst_flag) = (1.0f64, 0.0f64);
    for i in 0..=cfg.fpaa_instances {
        let (n, p_m) = if i == 0 { (2, cfg.fpaa_p_m) } else { (rng.gen_range(2..=8), rng.gen_range(p_star..=1.0)) };
        let (enc, ideal) = fpaa_instance(n, p_m, &mut rng)?;
        let (f, fail) = fpaa_trial(&enc, &ideal, p_star, delta)?;
        worst_f = worst_f.min(f);
        worst_flag = worst_flag.max(fail);
        rows.push(format!("{i},{n},{p_m:.12},{p_star:e},{delta:e},{f:.12},{fail:.12e}"));
    }
    let mut summary = RunSummary::default();
    summary.files.push(write_rows(&cfg.out.join("fpaa.csv"), FPAA_HEADER, &rows)?);
    summary.assertions.push(Assertion::at_least("fpaa_min_fidelity", worst_f, 1.0 - 2.0 * delta));
    summary.assertions.push(Assertion::at_most("fpaa_max_flag_failure", worst_flag, 2.0 * delta));
    summary.files.push(write_assertions(&cfg.out.join("fpaa_assertions.csv"), &summary.assertions)?);
    Ok(summary)
}

/// Largest pairwise deviation among Kraus chain, SWAP deferral and compression gadget.
pub fn gadget_deviations(circ: &HybridCircuit) -> Result<[f64; 3], CliError> {
    let kraus = circ.kraus_operator()?;
    let swap = swap_deferral_encoding(circ)?.encoded_matrix();
    let gadget = compression_gadget_encoding(circ)?.encoded_matrix();
    Ok([max_abs_diff(&kraus, &swap), max_abs_diff(&kraus, &gadget), max_abs_diff(&swap, &gadget)])
}

/// Random brickwork whose Kraus operator is not zero; contradictory repeated
/// measurements otherwise make every construction agree trivially.
pub fn nonvanishing_circuit(cfg: &ExperimentConfig, rng: &mut Rng) -> Result<HybridCircuit, CliError> {
    for _ in 0..MAX_CIRCUIT_DRAWS {
        let circ = HybridCircuit::random_brickwork(cfg.gadget_qubits, cfg.gadget_layers, cfg.gadget_meas, rng)?;
        if circ.kraus_operator()?.norm() > NONVANISHING {
            return Ok(circ);
        }
    }
    Err(CliError::Config(format!("no circuit with a nonzero Kraus operator in {MAX_CIRCUIT_DRAWS} draws")))
}

pub fn gadget_check(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&cfg.out)?;
    let mut rng = rng_for(cfg.seed, 22);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..cfg.gadget_circuits {
        let circ = nonvanishing_circuit(cfg, &mut rng)?;
        let [a, b, c] = gadget_deviations(&circ)?;
        worst = worst.max(a).max(b).max(c);
        rows.push(format!("{i},{},{},{a:.3e},{b:.3e},{c:.3e}", circ.n_qubits(), circ.n_meas()));
    }
    let mut summary = RunSummary::default();
    summary.files.push(write_rows(&cfg.out.join("gadget_check.csv"), GADGET_HEADER, &rows)?);
    summary.assertions.push(Assertion::at_most("equivalence_triangle_max_deviation", worst, GADGET_TOL));
    summary.files.push(write_assertions(&cfg.out.join("gadget_check_assertions.csv"), &summary.assertions)?);
    Ok(summary)
}

pub fn bounds(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&cfg.out)?;
    let suite = SuiteConfig {
        seed: cfg.seed,
        trials: cfg.bounds_trials,
        spectra: cfg.bounds_spectra,
        ..SuiteConfig::default()
    };
    let results = default_suite(&suite)?;
    let rows: Vec<String> = results.iter().map(|r| r.csv_row()).collect();
    let mut summary = RunSummary::default();
    summary.files.push(write_rows(&cfg.out.join("bounds.csv"), BOUNDS_CSV_HEADER, &rows)?);
    for r in &results {
        let relation = match r.kind {
            postsel::bounds::BoundKind::Lower => format!(">= {:e}", r.bound_value),
            postsel::bounds::BoundKind::Upper => format!("<= {:e}", r.bound_value),
        };
        summary.assertions.push(Assertion::with_relation(r.name.clone(), relation, r.measured_value, r.satisfied));
    }
    summary.files.push(write_assertions(&cfg.out.join("bounds_assertions.csv"), &summary.assertions)?);
    Ok(summary)
}

/// Circuit-tier runs of LAA and the pseudoinverse decoder against their spectrum formulas.
pub fn protocol(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&cfg.out)?;
    let mut rng = rng_for(cfg.seed, 23);
    let n = cfg.protocol_qubits;
    if cfg.protocol_mixed >= n || cfg.protocol_measured > n || n > 10 {
        return Err(CliError::Config(format!(
            "protocol needs protocol_mixed < protocol_qubits <= 10 and protocol_measured <= protocol_qubits, got {}/{}/{n}",
            cfg.protocol_mixed, cfg.protocol_measured
        )));
    }
    let measured: Vec<usize> = (0..cfg.protocol_measured).collect();
    let inst = MixedInstance {
        prep_unitary: Operator::square(haar_unitary(1 << n, &mut rng), vec![2; n])?,
        partition: (1 << cfg.protocol_mixed, 1 << (n - cfg.protocol_mixed)),
        target: Projector::qubit_outcome(n, &measured, &vec![0; measured.len()])?,
    };
    let spectrum = branch_spectrum(&inst)?;
    let target = inst.postselected_state()?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for scale in [1.0, 0.5, 0.25] {
        let p_star = scale * spectrum.p_max();
        let out = laa_simulate(&inst, p_star, PROTOCOL_DELTA)?;
        let formula = metrics(&spectrum, &SvtFunction::Polynomial(out.phases.realized_polynomial().clone()))?;
        let f = target.overlap(&out.state).norm_sqr();
        worst = worst.max((f - formula.f_qsvt).abs()).max((out.flag_probability - formula.p_qsvt).abs());
        rows.push(format!(
            "laa,{p_star:e},{f:.12},{:.12},{:.12},{:.12}",
            formula.f_qsvt, out.flag_probability, formula.p_qsvt
        ));
    }
    let tele = TeleportInstance::random((2, 4), (2, 4), &mut rng)?;
    let p_min = tele.spectrum().p_min();
    for scale in [1.0, 0.5] {
        let p_star = scale * p_min;
        let (phases, circuit) = pseudoinverse_circuit(&tele, p_star, PROTOCOL_DELTA)?;
        let formula =
            teleport_metrics(tele.spectrum(), &SvtFunction::Polynomial(phases.realized_polynomial().clone()))?;
        worst = worst.max((circuit.f_decoding - formula.f_decoding).abs()).max((circuit.p_succ - formula.p_succ).abs());
        rows.push(format!(
            "pseudoinverse,{p_star:e},{:.12},{:.12},{:.12},{:.12}",
            circuit.f_decoding, formula.f_decoding, circuit.p_succ, formula.p_succ
        ));
    }
    let mut summary = RunSummary::default();
    summary.files.push(write_rows(&cfg.out.join("protocol.csv"), PROTOCOL_HEADER, &rows)?);
    summary.assertions.push(Assertion::at_most("circuit_matches_formula", worst, CIRCUIT_FORMULA_TOL));
    summary.files.push(write_assertions(&cfg.out.join("protocol_assertions.csv"), &summary.assertions)?);
    Ok(summary)
}
