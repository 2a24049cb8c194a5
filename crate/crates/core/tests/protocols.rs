use postsel::blockenc::postselect_encoding;
use postsel::linalg::{
    cr, fidelity, haar_unitary, hermitian_eigen, identity, random_state, reduced_density, rng_for, Mat, Operator,
    Projector, StateVector, Vector, ZERO,
};
use postsel::protocols::*;
use postsel::svtfun::{fpaa_polynomial, SvtFunction};
use postsel::Error;
use proptest::prelude::*;

/// Real Householder reflection sending |0⟩ to `psi` (psi real).
fn householder(psi: &[f64]) -> Mat {
    let d = psi.len();
    let mut w = Vector::from_iterator(d, psi.iter().map(|&x| cr(-x)));
    w[0] += cr(1.0);
    let n2 = w.norm_squared();
    if n2 < 1e-30 {
        return identity(d);
    }
    identity(d) - (&w * w.adjoint()) * cr(2.0 / n2)
}

fn bit(i: usize, q: usize, n: usize) -> usize {
    (i >> (n - 1 - q)) & 1
}

fn state(amps: Vector, n: usize) -> StateVector {
    StateVector::new(amps, vec![2; n]).unwrap()
}

#[test]
fn plus_state_ensemble() {
    let s = 0.5f64.sqrt();
    let plus = state(Vector::from_vec(vec![cr(s), cr(s)]), 1);
    let ens = project_ensemble(&plus, &[0]).unwrap();
    assert_eq!(ens.entries.len(), 2);
    for (e, idx) in ens.entries.iter().zip([0, 1]) {
        assert!((e.probability - 0.5).abs() < 1e-15);
        assert!((e.state.amps()[idx].norm() - 1.0).abs() < 1e-15);
    }
    let zero = StateVector::basis(vec![2, 2], 0);
    let ens = project_ensemble(&zero, &[0]).unwrap();
    assert_eq!(ens.entries.len(), 1);
    assert_eq!(ens.entries[0].probability, 1.0);
}

#[test]
fn random_ensemble_matches_amplitude_sums() {
    let mut rng = rng_for(1, 0);
    let psi = state(random_state(16, &mut rng), 4);
    let measured = [3, 1];
    let ens = project_ensemble(&psi, &measured).unwrap();
    assert_eq!(ens.entries.len(), 4);
    assert!((ens.total_probability() - 1.0).abs() < 1e-12);
    for e in &ens.entries {
        let oracle: f64 = (0..16)
            .filter(|&i| bit(i, 3, 4) == e.outcome[0] as usize && bit(i, 1, 4) == e.outcome[1] as usize)
            .map(|i| psi.amps()[i].norm_sqr())
            .sum();
        assert!((e.probability - oracle).abs() < 1e-12);
        let leak = (e.state.amps() - e.projector.apply(e.state.amps())).norm();
        assert!(leak < 1e-12);
        assert!((e.projector.expectation(psi.amps()) - e.probability).abs() < 1e-12);
    }
}

#[test]
fn fpaa_with_certain_outcome() {
    let delta = 0.01;
    let h = Mat::from_row_slice(2, 2, &[cr(1.0), cr(1.0), cr(1.0), cr(-1.0)]) * cr(0.5f64.sqrt());
    let u = Operator::square(h.kronecker(&h), vec![2, 2]).unwrap();
    let enc = postselect_encoding(&u, &Projector::identity(vec![2, 2])).unwrap();
    let out = fpaa_prepare(&enc, 0.25, delta).unwrap();
    let psi = u.mat().column(0).into_owned();
    assert!((psi.dotc(out.state.amps()).norm() - 1.0).abs() < 1e-12);
    assert!(out.flag_probability >= 1.0 - 2.0 * delta);
}

fn two_qubit_instance(p_m: f64) -> (Operator, Projector, Vector) {
    // √p_m |0⟩|+⟩ + √(1−p_m) |1⟩|0⟩, post-selecting the first qubit on 0.
    let s = 0.5f64.sqrt();
    let psi = [p_m.sqrt() * s, p_m.sqrt() * s, (1.0 - p_m).sqrt(), 0.0];
    let u = Operator::square(householder(&psi), vec![2, 2]).unwrap();
    let ideal = Vector::from_vec(vec![cr(s), cr(s), ZERO, ZERO]);
    (u, Projector::qubit_outcome(2, &[0], &[0]).unwrap(), ideal)
}

#[test]
fn fpaa_above_threshold() {
    let (u, target, ideal) = two_qubit_instance(0.3);
    let enc = postselect_encoding(&u, &target).unwrap();
    let out = fpaa_prepare(&enc, 0.25, 0.01).unwrap();
    let fid = ideal.dotc(out.state.amps()).norm_sqr();
    assert!(fid >= 0.98);
    assert!(1.0 - out.flag_probability <= 0.02);
}

#[test]
fn fpaa_below_threshold_matches_oracle() {
    let (u, target, ideal) = two_qubit_instance(0.1);
    let enc = postselect_encoding(&u, &target).unwrap();
    let phases = fpaa_phases(0.25, 0.01).unwrap();
    let out = fpaa_prepare_with(&enc, &phases).unwrap();
    // Rank-one block: the direction is exact, only the flag probability drops.
    let predicted = phases.realized_polynomial().eval(0.1f64.sqrt()).powi(2);
    assert!((out.flag_probability - predicted).abs() < 1e-9);
    assert!((ideal.dotc(out.state.amps()).norm_sqr() - 1.0).abs() < 1e-9);
    assert!(out.flag_probability < 0.98);
}

#[test]
fn swap_test_examples() {
    let mut rng = rng_for(2, 0);
    let psi = state(random_state(4, &mut rng), 2);
    assert!((swap_test_accept_probability(&psi, &psi, &[0, 1]).unwrap() - 1.0).abs() < 1e-12);
    let s = 0.5f64.sqrt();
    let bell = state(Vector::from_vec(vec![cr(s), ZERO, ZERO, cr(s)]), 2);
    let p = swap_test_accept_probability(&bell, &bell, &[0]).unwrap();
    assert!((2.0 * p - 1.0 - 0.5).abs() < 1e-12);
    let a = StateVector::basis(vec![2, 2], 0);
    let b = StateVector::basis(vec![2, 2], 3);
    assert!((swap_test_accept_probability(&a, &b, &[0, 1]).unwrap() - 0.5).abs() < 1e-15);
    let shots: Vec<i8> = (0..100).map(|_| swap_test_purity(&psi, &psi, &[0, 1], &mut rng).unwrap()).collect();
    assert!(shots.iter().all(|&x| x == 1));
}

/// Prep unitary for a real-amplitude state.
fn prep_for(psi: &[f64], n: usize) -> Operator {
    Operator::square(householder(psi), vec![2; n]).unwrap()
}

#[test]
fn deterministic_outcome_estimates_plain_purity() {
    // (cos t |00⟩ + sin t |11⟩) ⊗ |0⟩, measuring the last qubit (always 0).
    let t: f64 = 0.4;
    let mut psi = vec![0.0; 8];
    psi[0] = t.cos();
    psi[6] = t.sin();
    let prep = prep_for(&psi, 3);
    let cfg = EstimationConfig { k: 2, p_star: 0.25, delta: 0.01, budget: 20_000, seed: 3 };
    let est = SwapTestPurity { subsystem: vec![0] };
    let r = estimate_nonlinear(&prep, &[2], &est, &cfg).unwrap();
    let purity = t.cos().powi(4) + t.sin().powi(4);
    assert!((r.exact - purity).abs() < 1e-12);
    assert!((r.estimate - purity).abs() <= 4.0 * r.stderr);
    let binomial = ((1.0 - purity * purity) / cfg.budget as f64).sqrt();
    assert!((r.stderr / binomial - 1.0).abs() < 0.05);
}

#[test]
fn ghz_branches_are_product_states() {
    let s = 0.5f64.sqrt();
    let mut psi = vec![0.0; 8];
    psi[0] = s;
    psi[7] = s;
    let prep = prep_for(&psi, 3);
    let cfg = EstimationConfig { k: 2, p_star: 0.25, delta: 0.01, budget: 2_000, seed: 4 };
    let r = estimate_nonlinear(&prep, &[2], &SwapTestPurity { subsystem: vec![0] }, &cfg).unwrap();
    assert_eq!(r.estimate, 1.0);
    assert!((r.exact - 1.0).abs() < 1e-12);
}

#[test]
fn flag_failure_rate_is_bounded() {
    let mut rng = rng_for(5, 0);
    let prep = Operator::square(haar_unitary(16, &mut rng), vec![2; 4]).unwrap();
    let (p_star, delta) = (0.2, 0.05);
    let cfg = EstimationConfig { k: 2, p_star, delta, budget: 10_000, seed: 6 };
    let r = estimate_nonlinear(&prep, &[0, 1], &SwapTestPurity { subsystem: vec![2] }, &cfg).unwrap();
    let psi = StateVector::new(prep.mat().column(0).into_owned(), vec![2; 4]).unwrap();
    let ens = project_ensemble(&psi, &[0, 1]).unwrap();
    let above: f64 = ens.entries.iter().filter(|e| e.probability >= p_star).map(|e| e.probability).sum();
    let bound = 2.0 * delta * above + (1.0 - above);
    let n = r.attempts as f64;
    let stderr = (r.flag_fail_rate * (1.0 - r.flag_fail_rate) / n).sqrt();
    assert!(r.flag_fail_rate <= bound + 3.0 * stderr, "{} vs {bound}", r.flag_fail_rate);
}

#[test]
fn ideal_amplifier_is_unbiased() {
    let mut rng = rng_for(7, 0);
    let prep = Operator::square(haar_unitary(16, &mut rng), vec![2; 4]).unwrap();
    let measured = [1, 3];
    let cfg = EstimationConfig { k: 2, p_star: 0.25, delta: 0.0, budget: 100_000, seed: 8 };
    let r = estimate_nonlinear(&prep, &measured, &SwapTestPurity { subsystem: vec![0] }, &cfg).unwrap();
    // Brute force: Σ_m p_m tr(ρ_{A,m}²) from explicit branch vectors.
    let psi = prep.mat().column(0).into_owned();
    let mut brute = 0.0;
    for m in 0..4usize {
        let mut branch = Vector::zeros(16);
        for i in 0..16 {
            if bit(i, 1, 4) == m >> 1 && bit(i, 3, 4) == m & 1 {
                branch[i] = psi[i];
            }
        }
        let p = branch.norm_squared();
        let rho = reduced_density(&(branch / cr(p.sqrt())), &[2; 4], &[0]).unwrap();
        brute += p * (&rho * &rho).trace().re;
    }
    assert!((r.exact - brute).abs() < 1e-12);
    assert!((r.estimate - brute).abs() <= 4.0 * r.stderr);
    assert_eq!(r.failures, 0);
}

#[test]
fn estimator_arity_is_checked() {
    let prep = Operator::square(identity(4), vec![2, 2]).unwrap();
    let est = SwapTestPurity { subsystem: vec![0] };
    let cfg = EstimationConfig { k: 3, p_star: 0.25, delta: 0.0, budget: 10, seed: 0 };
    assert!(matches!(estimate_nonlinear(&prep, &[1], &est, &cfg), Err(Error::Config(_))));
    let cfg = EstimationConfig { k: 1, ..cfg };
    assert!(matches!(estimate_nonlinear(&prep, &[1], &est, &cfg), Err(Error::Config(_))));
    let cfg = EstimationConfig { k: 2, budget: 0, ..cfg };
    assert!(matches!(estimate_nonlinear(&prep, &[1], &est, &cfg), Err(Error::Config(_))));
}

fn random_instance(seed: u64, n: usize, na: usize, measured: &[usize], outcome: &[u8]) -> MixedInstance {
    let mut rng = rng_for(seed, 0);
    let u = Operator::square(haar_unitary(1 << n, &mut rng), vec![2; n]).unwrap();
    MixedInstance {
        prep_unitary: u,
        partition: (1 << na, 1 << (n - na)),
        target: Projector::qubit_outcome(n, measured, outcome).unwrap(),
    }
}

#[test]
fn branch_spectrum_examples() {
    let u = Operator::square(identity(8), vec![2; 3]).unwrap();
    let inst = MixedInstance { prep_unitary: u, partition: (4, 2), target: Projector::identity(vec![2; 3]) };
    let s = branch_spectrum(&inst).unwrap();
    assert!(s.values().iter().all(|p| (p - 1.0).abs() < 1e-12));

    let pure = random_instance(9, 3, 0, &[0], &[1]);
    let s = branch_spectrum(&pure).unwrap();
    assert_eq!(s.d_r(), 1);
    let psi = pure.prep_unitary.mat().column(0).into_owned();
    assert!((s.p_m() - pure.target.expectation(&psi)).abs() < 1e-12);

    let inst = random_instance(10, 4, 2, &[0, 3], &[0, 1]);
    let s = branch_spectrum(&inst).unwrap();
    let mut sv: Vec<f64> = inst.encoding().unwrap().singular_values().iter().map(|x| x * x).collect();
    sv.sort_by(f64::total_cmp);
    for (a, b) in s.values().iter().zip(&sv) {
        assert!((a - b).abs() < 1e-9);
    }
    let q = branch_spectrum_qubits(&inst.isometry(), &[0, 3], &[0, 1]).unwrap();
    for (a, b) in s.values().iter().zip(q.values()) {
        assert!((a - b).abs() < 1e-12);
    }
    let mean = s.values().iter().sum::<f64>() / 4.0;
    assert!((s.p_m() - mean).abs() < 1e-15);
}

#[test]
fn metrics_examples() {
    let flat = BranchSpectrum::new(vec![0.3; 4]).unwrap();
    assert!((metrics(&flat, &SvtFunction::linear_amp(0.1).unwrap()).unwrap().f_uhlmann - 1.0).abs() < 1e-12);

    let spec = BranchSpectrum::new(vec![0.1, 0.4]).unwrap();
    let r = metrics(&spec, &SvtFunction::linear_amp(0.4).unwrap()).unwrap();
    let uhlmann = (0.1f64.sqrt() + 0.4f64.sqrt()).powi(2) / (4.0 * 0.25);
    assert!((r.f_uhlmann - uhlmann).abs() < 1e-12);
    assert!((r.f_uhlmann - 0.9).abs() < 1e-12);
    assert!((r.f_qsvt - 1.0).abs() < 1e-12);
    assert!((r.p_qsvt - 0.625).abs() < 1e-12);
    assert!((r.f_overall - r.p_qsvt * r.f_qsvt).abs() < 1e-12);
    assert_eq!(METRICS_CSV_HEADER.split(',').count(), r.csv_row(0.4).split(',').count());

    let zero = BranchSpectrum::new(vec![0.0, 0.0]).unwrap();
    assert!(matches!(metrics(&zero, &SvtFunction::Sign), Err(Error::Degenerate(_))));
}

#[test]
fn sign_function_saturates_uhlmann() {
    let spec = BranchSpectrum::new(vec![0.02, 0.1, 0.35, 0.6]).unwrap();
    for f in [SvtFunction::Sign, SvtFunction::linear_amp(0.01).unwrap()] {
        let r = metrics(&spec, &f).unwrap();
        assert!((r.f_overall - r.f_uhlmann).abs() < 1e-9);
    }
}

#[test]
fn laa_pure_limit_is_fpaa_like() {
    let inst = random_instance(11, 3, 0, &[1], &[0]);
    let p_m = branch_spectrum(&inst).unwrap().p_m();
    let out = laa_simulate(&inst, (2.0 * p_m).min(1.0), 1e-3).unwrap();
    let ideal = inst.postselected_state().unwrap();
    assert!((ideal.overlap(&out.state).norm_sqr() - 1.0).abs() < 1e-9);
    let predicted = out.phases.realized_polynomial().eval(p_m.sqrt()).powi(2);
    assert!((out.flag_probability - predicted).abs() < 1e-9);
}

#[test]
fn laa_on_uninformative_measurement() {
    // U = I_A ⊗ U_B with the measurement on B only: every branch has the same weight.
    let mut rng = rng_for(12, 0);
    let ub = haar_unitary(4, &mut rng);
    let u = Operator::square(identity(4).kronecker(&ub), vec![2; 4]).unwrap();
    let inst =
        MixedInstance { prep_unitary: u, partition: (4, 4), target: Projector::qubit_outcome(4, &[2], &[0]).unwrap() };
    let spec = branch_spectrum(&inst).unwrap();
    assert!(spec.p_max() - spec.p_min() < 1e-12);
    let out = laa_simulate(&inst, spec.p_m(), 1e-3).unwrap();
    let ideal = inst.postselected_state().unwrap();
    assert!(ideal.overlap(&out.state).norm_sqr() >= 1.0 - 1e-8);
    assert!(out.flag_probability > 0.95);
    let r = metrics(&spec, &SvtFunction::linear_amp(spec.p_m()).unwrap()).unwrap();
    assert!((r.f_qsvt - 1.0).abs() < 1e-12 && (r.p_qsvt - 1.0).abs() < 1e-12);
}

/// Branch-basis construction: Σ_a f(√p_a) |ā'⟩_R |ψ_am⟩, normalized.
fn spectrum_state(inst: &MixedInstance, f: impl Fn(f64) -> f64) -> Vector {
    let x = inst.target.apply_cols(&inst.isometry());
    let (vals, w) = hermitian_eigen(&(x.adjoint() * &x));
    let (d, da) = x.shape();
    let mut out = Vector::zeros(da * d);
    for (a, &p) in vals.iter().enumerate() {
        if p <= 1e-14 {
            continue;
        }
        let branch = &x * w.column(a) / cr(p.sqrt());
        let weight = f(p.sqrt());
        for r in 0..da {
            let ref_amp = w[(r, a)].conj();
            for i in 0..d {
                out[r * d + i] += ref_amp * branch[i] * cr(weight);
            }
        }
    }
    let n = out.norm();
    out / cr(n)
}

#[test]
fn laa_circuit_matches_spectrum_construction() {
    let inst = random_instance(13, 6, 2, &[0, 4], &[1, 0]);
    let spec = branch_spectrum(&inst).unwrap();
    let p_star = 0.5 * spec.p_max();
    let out = laa_simulate(&inst, p_star, 1e-2).unwrap();
    let realized = out.phases.realized_polynomial().clone();
    let oracle = spectrum_state(&inst, |s| realized.eval(s));
    let fid = oracle.dotc(out.state.amps()).norm_sqr();
    assert!(fid >= 1.0 - 1e-8, "{fid}");
    let report = metrics(&spec, &SvtFunction::Polynomial(realized)).unwrap();
    assert!((out.flag_probability - report.p_qsvt).abs() < 1e-8);
    let target = inst.postselected_state().unwrap();
    assert!((target.overlap(&out.state).norm_sqr() - report.f_qsvt).abs() < 1e-8);
}

#[test]
fn circuit_tier_envelope() {
    let u = Operator::square(identity(2048), vec![2; 11]).unwrap();
    let inst = MixedInstance {
        prep_unitary: u,
        partition: (2, 1024),
        target: Projector::qubit_outcome(11, &[0], &[0]).unwrap(),
    };
    assert!(matches!(laa_simulate(&inst, 0.5, 1e-2), Err(Error::Resource(_))));
}

#[test]
fn purified_fpaa_on_pure_input() {
    let (u, target, _) = two_qubit_instance(0.4);
    let enc = postselect_encoding(&u, &target).unwrap();
    let direct = fpaa_prepare(&enc, 0.25, 0.01).unwrap();
    let v = Operator::square(identity(2).kronecker(u.mat()), vec![2, 2, 2]).unwrap();
    let out = purified_fpaa(&v, 1, &target, 0.25, 0.01).unwrap();
    assert!((out.flag_probability - direct.flag_probability).abs() < 1e-10);
    let f = fidelity(&out.reduced, &direct.state.density()).unwrap();
    assert!((f - 1.0).abs() < 1e-10);
}

#[test]
fn purified_fpaa_on_maximally_mixed_qubit() {
    let delta = 0.01;
    let s = 0.5f64.sqrt();
    let bell = [s, 0.0, 0.0, s];
    let v = Operator::square(householder(&bell), vec![2, 2]).unwrap();
    let target = Projector::basis_states(&[0], vec![2]).unwrap();
    let out = purified_fpaa(&v, 1, &target, 0.25, delta).unwrap();
    let expected = Operator::square(Mat::from_row_slice(2, 2, &[cr(1.0), ZERO, ZERO, ZERO]), vec![2]).unwrap();
    assert!(fidelity(&out.reduced, &expected).unwrap() >= 1.0 - 2.0 * delta);
    assert!(1.0 - out.flag_probability <= 2.0 * delta);
    let joint = StateVector::basis(vec![2, 2], 0);
    assert!(joint.overlap(&out.state).norm_sqr() >= 1.0 - 2.0 * delta);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn relabeling_a_keeps_the_spectrum(seed in any::<u64>()) {
        let inst = random_instance(seed, 4, 2, &[1], &[1]);
        let mut rng = rng_for(seed, 9);
        let w = haar_unitary(4, &mut rng);
        let rotated = Operator::square(inst.prep_unitary.mat() * w.kronecker(&identity(4)), vec![2; 4]).unwrap();
        let inst2 = MixedInstance { prep_unitary: rotated, ..inst.clone() };
        let a = branch_spectrum(&inst).unwrap();
        let b = branch_spectrum(&inst2).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn overall_fidelity_is_bounded_by_uhlmann(p in proptest::collection::vec(0.0f64..1.0, 1..12), ps in 1e-4f64..1.0) {
        prop_assume!(p.iter().sum::<f64>() > 1e-6);
        let spec = BranchSpectrum::new(p).unwrap();
        for f in [SvtFunction::linear_amp(ps).unwrap(), SvtFunction::Sign, SvtFunction::Polynomial(fpaa_polynomial(0.25, 0.1).unwrap())] {
            let r = metrics(&spec, &f).unwrap();
            prop_assert!((r.f_overall - r.p_qsvt * r.f_qsvt).abs() <= 1e-12);
            prop_assert!(r.f_overall <= r.f_uhlmann + 1e-9);
            for v in [r.f_qsvt, r.p_qsvt, r.f_overall, r.f_uhlmann] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
