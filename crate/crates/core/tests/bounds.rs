use postsel::bounds::*;
use postsel::decoders::teleport_metrics_from_values;
use postsel::linalg::{cr, identity, max_abs_diff, random_state, rng_for, StateVector, Vector};
use postsel::protocols::{metrics, metrics_from_values, BranchSpectrum};
use postsel::svtfun::SvtFunction;
use postsel::Error;
use proptest::prelude::*;

fn state(amps: Vec<f64>) -> StateVector {
    let d = amps.len();
    StateVector::new(Vector::from_iterator(d, amps.into_iter().map(cr)), vec![d]).unwrap()
}

#[test]
fn average_projector_examples() {
    let mut rng = rng_for(5, 0);
    let psi = StateVector::new(random_state(4, &mut rng), vec![4]).unwrap();
    let pure = average_projector(&psi, 1.0, 1).unwrap();
    let outer = psi.amps() * psi.amps().adjoint();
    assert!(max_abs_diff(pure.mat(), &outer) < 1e-14);

    let qubit = state(vec![0.6, 0.8]);
    let half = average_projector(&qubit, 0.5, 1).unwrap();
    assert!(max_abs_diff(half.mat(), &(identity(2) * cr(0.5))) < 1e-15);

    let one = state(vec![1.0]);
    assert!(matches!(average_projector(&one, 0.5, 1), Err(Error::Domain(_))));
    assert!(matches!(average_projector(&psi, 0.5, 4), Err(Error::Domain(_))));
}

#[test]
fn average_projector_trace_is_rank() {
    let mut rng = rng_for(6, 0);
    for d in 2..10 {
        let psi = StateVector::new(random_state(d, &mut rng), vec![d]).unwrap();
        for d_m in 1..d {
            let avg = average_projector(&psi, 0.37, d_m).unwrap();
            assert!((avg.trace().re - d_m as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn average_projector_matches_haar_average() {
    let mut rng = rng_for(7, 0);
    let psi = StateVector::new(random_state(8, &mut rng), vec![8]).unwrap();
    let proj = projector_with_overlap(&psi, 0.2, 3, &mut rng).unwrap();
    assert_eq!(proj.rank(), 3);
    assert!((proj.expectation(psi.amps()) - 0.2).abs() < 1e-12);
    let mc = average_projector_monte_carlo(&psi, &proj, 10_000, &mut rng).unwrap();
    let exact = average_projector(&psi, 0.2, 3).unwrap();
    assert!(max_abs_diff(mc.mat(), exact.mat()) <= 5.0 / 100.0);
}

// Success probability after k iterations is sin²((2k+1)θ) with sin²θ = p;
// stop at 1 − ε or at the first peak.
fn grover_oracle(p: f64, eps: f64) -> usize {
    let theta = p.sqrt().asin();
    let succ = |k: usize| ((2 * k + 1) as f64 * theta).sin().powi(2);
    (0..).find(|&k| succ(k) >= 1.0 - eps || succ(k + 1) < succ(k)).unwrap()
}

#[test]
fn grover_examples() {
    let quarter = grover_scaling_experiment(&[0.25], 1e-12).unwrap()[0];
    assert_eq!(quarter.iterations, Some(1));

    let g = grover_scaling_experiment(&[1e-3], 0.02).unwrap()[0];
    let k = g.iterations.unwrap();
    assert_eq!(k, grover_oracle(1e-3, 0.02));
    assert!((g.predicted - 24.836).abs() < 1e-3);
    assert!((k as f64 / g.predicted - 1.0).abs() <= 0.2);
}

#[test]
fn grover_counts_match_rotation_closed_form() {
    let grid: Vec<f64> = (0..15).map(|i| 10f64.powf(-4.0 + 3.0 * i as f64 / 14.0)).collect();
    for g in grover_scaling_experiment(&grid, 0.02).unwrap() {
        assert_eq!(g.iterations, Some(grover_oracle(g.p_m, 0.02)), "p_m = {}", g.p_m);
        if g.p_m <= 0.05 {
            assert!((g.iterations.unwrap() as f64 / g.predicted - 1.0).abs() <= 0.2);
        }
    }
}

#[test]
fn grover_loglog_slope() {
    let grid: Vec<f64> = (0..9).map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / 8.0)).collect();
    let slope = loglog_slope(&grover_scaling_experiment(&grid, 0.02).unwrap()).unwrap();
    assert!((-0.55..=-0.45).contains(&slope), "slope {slope}");
}

#[test]
fn zero_perturbation_is_exact() {
    let s = BranchSpectrum::new(vec![0.1, 0.4, 0.25, 0.05]).unwrap();
    let mut rng = rng_for(1, 0);
    for task in [Task::Mixed, Task::Teleport] {
        let r = multiplicative_error_fidelity_check(&s, 0.0, 10, task, &mut rng).unwrap();
        assert!((r.measured_value - 1.0).abs() < 1e-14);
        assert!(r.satisfied);
    }
}

#[test]
fn worst_case_perturbation_saturates() {
    let mut rng = rng_for(2, 0);
    for trial in 0..50 {
        let d = 2 + trial % 20;
        let s = random_spectrum(d, &mut rng).unwrap();
        let (p, d_f, p_m) = (s.values(), d as f64, s.p_m());
        for delta in [0.05, 0.1, 0.3] {
            // Mixed: branch weights p/(d p_m), values √(p/p_max)(1 + δ).
            let w: Vec<f64> = p.iter().map(|x| x / (d_f * p_m)).collect();
            let dl = worst_case_perturbation(&w, delta);
            assert!(dl.iter().all(|x| x.abs() <= delta + 1e-15));
            let d1: f64 = w.iter().zip(&dl).map(|(a, b)| a * b).sum();
            let d2: f64 = w.iter().zip(&dl).map(|(a, b)| a * b * b).sum();
            assert!((d1 + d2).abs() < 1e-12, "Δ₁ = {d1}, Δ₂ = {d2}");
            let vals: Vec<f64> = p.iter().zip(&dl).map(|(x, e)| (x / s.p_max()).sqrt() * (1.0 + e)).collect();
            let f = metrics_from_values(&s, &vals).unwrap().f_qsvt;
            assert!((f - (1.0 - d2)).abs() < 1e-12);
            assert!(f >= 1.0 - delta * delta - 1e-12);

            // Teleport: uniform weights, values √(p_min/p)(1 + δ).
            let w = vec![1.0 / d_f; d];
            let dl = worst_case_perturbation(&w, delta);
            let d2: f64 = dl.iter().map(|e| e * e / d_f).sum();
            let vals: Vec<f64> = p.iter().zip(&dl).map(|(x, e)| (s.p_min() / x).sqrt() * (1.0 + e)).collect();
            let f = teleport_metrics_from_values(&s, &vals).unwrap().f_decoding;
            assert!((f - (1.0 - d2)).abs() < 1e-12);
        }
    }
}

#[test]
fn multiplicative_error_bound_holds() {
    let mut rng = rng_for(3, 0);
    for task in [Task::Mixed, Task::Teleport] {
        for _ in 0..10 {
            let s = random_spectrum(12, &mut rng).unwrap();
            let r = multiplicative_error_fidelity_check(&s, 0.1, 1000, task, &mut rng).unwrap();
            assert!(r.satisfied && r.measured_value >= 0.99 - 1e-9, "{r:?}");
        }
    }
}

fn mixed_condition(p: &[f64], alpha: f64, eps: f64) -> bool {
    let p_m = p.iter().sum::<f64>() / p.len() as f64;
    p.iter().filter(|&&x| x > p_m / alpha).sum::<f64>() / (p.len() as f64 * p_m) <= eps
}

fn teleport_condition(p: &[f64], alpha: f64, eps: f64) -> bool {
    let p_m = p.iter().sum::<f64>() / p.len() as f64;
    p.iter().filter(|&&x| x < alpha * p_m).count() as f64 / p.len() as f64 <= eps
}

// Largest admissible α among the breakpoints, each tested at its exact threshold.
fn alpha_line_search(p: &[f64], eps: f64, task: Task) -> f64 {
    let (d, p_m) = (p.len() as f64, p.iter().sum::<f64>() / p.len() as f64);
    p.iter()
        .filter_map(|&t| match task {
            Task::Mixed => (p.iter().filter(|&&x| x > t).sum::<f64>() / (d * p_m) <= eps).then(|| p_m / t),
            Task::Teleport => (p.iter().filter(|&&x| x < t).count() as f64 / d <= eps).then(|| t / p_m),
        })
        .fold(0.0, f64::max)
}

#[test]
fn alpha_is_maximal() {
    let mut rng = rng_for(4, 0);
    for i in 0..200 {
        let s = random_spectrum(2 + i % 40, &mut rng).unwrap();
        let eps = 0.05 + 0.9 * (i as f64 / 200.0);
        for task in [Task::Mixed, Task::Teleport] {
            let a = max_alpha(&s, eps, task).unwrap();
            let oracle = alpha_line_search(s.values(), eps, task);
            assert!((a - oracle).abs() <= 1e-12 * oracle.max(1.0), "{task:?}: {a} vs {oracle}");
            let cond = match task {
                Task::Mixed => mixed_condition,
                Task::Teleport => teleport_condition,
            };
            assert!(!cond(s.values(), a + 1e-9, eps), "{task:?}: α + 1e-9 still admissible");
        }
    }
}

#[test]
fn uniform_spectrum_tail_bounds() {
    let s = BranchSpectrum::new(vec![0.2; 6]).unwrap();
    for eps in [0.1, 0.5, 0.9] {
        for task in [Task::Mixed, Task::Teleport] {
            let r = tail_bound_check(&s, eps, task).unwrap();
            let alpha = r.parameters.iter().find(|(k, _)| *k == "alpha").unwrap().1;
            assert!((alpha - 1.0).abs() < 1e-12);
            assert!(r.satisfied && r.measured_value >= 1.0 - eps);
        }
    }
}

#[test]
fn two_branch_tail_bound() {
    // p_m = 0.25; only 0.4 may sit above the threshold, so α = 0.25/0.1.
    let s = BranchSpectrum::new(vec![0.1, 0.4]).unwrap();
    let a = max_alpha(&s, 0.8, Task::Mixed).unwrap();
    assert!((a - alpha_line_search(s.values(), 0.8, Task::Mixed)).abs() < 1e-12);
    assert!((a - 2.5).abs() < 1e-12);
    let r = tail_bound_check(&s, 0.8, Task::Mixed).unwrap();
    assert!(r.satisfied && r.bound_value <= r.measured_value + 1e-12);
    assert!((r.measured_value - 0.5).abs() < 1e-12);
}

#[test]
fn tail_bound_rejects_bad_epsilon() {
    let s = BranchSpectrum::new(vec![0.1, 0.4]).unwrap();
    assert!(matches!(max_alpha(&s, 0.0, Task::Mixed), Err(Error::Domain(_))));
    assert!(matches!(tail_bound_check(&s, 1.0, Task::Teleport), Err(Error::Domain(_))));
}

#[test]
fn vacuous_teleport_tail_bound() {
    // Half the branches vanish: no α > 0 keeps the tail below ε = 0.4.
    let s = BranchSpectrum::new(vec![0.0, 0.0, 0.3, 0.5]).unwrap();
    let r = tail_bound_check(&s, 0.4, Task::Teleport).unwrap();
    assert!(r.satisfied);
    assert_eq!(r.bound_value, 0.0);
}

#[test]
fn aqec_bound_on_near_uniform_spectra() {
    let mut rng = rng_for(8, 0);
    let mut checked = 0;
    while checked < 100 {
        let s = random_spectrum(8, &mut rng).unwrap();
        let p_m = s.p_m();
        let dev = s.values().iter().map(|p| (p / p_m - 1.0).abs()).sum::<f64>() / 16.0;
        if dev >= 0.9 {
            continue;
        }
        let eps = dev + (0.99 - dev) * 0.5;
        let r = aqec_bound_check(&s, eps, dev).unwrap();
        let expected = (1.0 - dev / eps) * (1.0 - eps);
        assert!((r.bound_value - expected).abs() < 1e-12);
        assert!(r.satisfied, "{r:?}");
        checked += 1;
    }
    let s = BranchSpectrum::new(vec![0.1, 0.4]).unwrap();
    assert!(matches!(aqec_bound_check(&s, 0.5, 0.01), Err(Error::Domain(_))));
}

#[test]
fn uhlmann_oracle_examples() {
    let mut rng = rng_for(9, 0);
    let flat = uhlmann_oracle(&two_branch_instance(0.3, 0.3, &mut rng).unwrap()).unwrap();
    assert!(flat.agrees() && (flat.from_states - 1.0).abs() < 1e-9);
    let two = uhlmann_oracle(&two_branch_instance(0.1, 0.4, &mut rng).unwrap()).unwrap();
    assert!(two.agrees());
    assert!((two.from_states - 0.9).abs() < 1e-9 && (two.from_spectrum - 0.9).abs() < 1e-12);
}

#[test]
fn check_result_margin_and_row() {
    let lower = BoundCheckResult::new("x", BoundKind::Lower, 0.5, 0.5 - 5e-10);
    assert!(lower.satisfied && lower.margin < 0.0);
    let upper = BoundCheckResult::new("y", BoundKind::Upper, 0.5, 0.6);
    assert!(!upper.satisfied);
    assert_eq!(upper.csv_row().split(',').count(), BOUNDS_CSV_HEADER.split(',').count());
}

#[test]
fn default_suite_is_satisfied() {
    let results = default_suite(&SuiteConfig::default()).unwrap();
    assert!(results.len() >= 14);
    for r in &results {
        assert!(r.satisfied, "{}", r.csv_row());
    }
}

proptest! {
    #[test]
    fn uhlmann_caps_overall_fidelity(
        p in prop::collection::vec(1e-4f64..1.0, 2..24),
        p_star in 1e-3f64..1.0,
        family in 0usize..4,
    ) {
        let s = BranchSpectrum::new(p).unwrap();
        let f = match family {
            0 => SvtFunction::linear_amp(p_star),
            1 => SvtFunction::trunc_inverse(p_star),
            2 => SvtFunction::linear_amp_cutoff(p_star),
            _ => SvtFunction::inverse_cutoff(p_star),
        }.unwrap();
        let r = metrics(&s, &f).unwrap();
        prop_assert!(r.f_overall <= r.f_uhlmann + 1e-12);
    }

    #[test]
    fn tail_bounds_hold(p in prop::collection::vec(1e-4f64..1.0, 2..32), eps in 0.01f64..0.99) {
        let s = BranchSpectrum::new(p).unwrap();
        for task in [Task::Mixed, Task::Teleport] {
            let r = tail_bound_check(&s, eps, task).unwrap();
            prop_assert!(r.satisfied, "{:?}", r);
        }
    }
}
