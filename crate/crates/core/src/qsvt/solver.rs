//! Phase solving in the symmetric `W_x` convention, then conversion to the
//! reflection convention used by the circuit.
//!
//! `W_x`: `U(x) = e^{iψ_0 Z} Π_k W(x) e^{iψ_k Z}` with `W(x) = e^{i arccos(x) X}`.
//! Reflection: `[Π_j e^{iφ_j Z} R(x)]_{00}` with `R(x) = [[x, s], [s, -x]]`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector, Matrix2};

use super::PhaseSequence;
use crate::linalg::{c, C64};
use crate::svtfun::{chebyshev_coefficients, OddPolynomial};
use crate::{tol, Error, Result};

type M2 = Matrix2<C64>;

const MAX_ITERATIONS: usize = 10_000;

fn phase(theta: f64) -> M2 {
    M2::new(c(theta.cos(), theta.sin()), C64::default(), C64::default(), c(theta.cos(), -theta.sin()))
}

fn signal_w(x: f64) -> M2 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    M2::new(c(x, 0.0), c(0.0, s), c(0.0, s), c(x, 0.0))
}

fn reflection(x: f64) -> M2 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    M2::new(c(x, 0.0), c(s, 0.0), c(s, 0.0), c(-x, 0.0))
}

/// `[Π_j e^{iφ_j Z} R(x)]_{00}` for reflection-convention phases.
pub fn reflection_response(phases: &[f64], x: f64) -> C64 {
    let r = reflection(x);
    let mut acc = M2::identity();
    for &p in phases {
        acc = acc * phase(p) * r;
    }
    acc[(0, 0)]
}

/// Phases for `T_d` itself (optionally negated), no solving needed.
pub fn chebyshev_phases(d: usize, negate: bool) -> Vec<f64> {
    let mut p = vec![FRAC_PI_2; d];
    p[0] = -((d as f64) - 1.0) * FRAC_PI_2 + if negate { PI } else { 0.0 };
    p
}

fn full_phases(reduced: &[f64], d: usize) -> Vec<f64> {
    (0..=d).map(|k| reduced[k.min(d - k)]).collect()
}

/// Symmetric `W_x` phases → reflection phases (length `d`).
fn to_reflection(full: &[f64]) -> Vec<f64> {
    let d = full.len() - 1;
    let mut out = Vec::with_capacity(d);
    out.push(full[0] + full[d] - FRAC_PI_2 + (d as f64) * FRAC_PI_2);
    out.extend(full[1..d].iter().map(|p| p - FRAC_PI_2));
    out
}

/// Real part of `U_00` and its gradient with respect to the reduced phases.
fn response_and_gradient(reduced: &[f64], d: usize, x: f64) -> (f64, Vec<f64>) {
    let full = full_phases(reduced, d);
    let w = signal_w(x);
    let e: Vec<M2> = full.iter().map(|&p| phase(p)).collect();
    // prefix[k] = e_0 W e_1 W … e_{k-1} W
    let mut prefix = Vec::with_capacity(d + 1);
    let mut acc = M2::identity();
    for k in 0..=d {
        prefix.push(acc);
        if k < d {
            acc = acc * e[k] * w;
        }
    }
    // suffix[k] = W e_{k+1} … W e_d (identity for k = d)
    let mut suffix = vec![M2::identity(); d + 1];
    for k in (0..d).rev() {
        suffix[k] = w * e[k + 1] * suffix[k + 1];
    }
    let u = prefix[d] * e[d];
    let iz = M2::new(c(0.0, 1.0), C64::default(), C64::default(), c(0.0, -1.0));
    let mut grad = vec![0.0; reduced.len()];
    for k in 0..=d {
        let dk = (prefix[k] * iz * e[k] * suffix[k])[(0, 0)].re;
        grad[k.min(d - k)] += dk;
    }
    (u[(0, 0)].re, grad)
}

fn solve_nodes(n: usize) -> Vec<f64> {
    (1..=n).map(|j| ((2 * j - 1) as f64 * PI / (4 * n) as f64).cos()).collect()
}

struct NodeLoss<'a> {
    d: usize,
    nodes: &'a [f64],
    targets: &'a [f64],
}

impl NodeLoss<'_> {
    fn residuals(&self, reduced: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let n = self.nodes.len();
        let mut r = vec![0.0; n];
        let mut jac = DMatrix::zeros(n, reduced.len());
        for (j, (&x, &t)) in self.nodes.iter().zip(self.targets).enumerate() {
            let (g, grad) = response_and_gradient(reduced, self.d, x);
            r[j] = g - t;
            for (k, gk) in grad.into_iter().enumerate() {
                jac[(j, k)] = gk;
            }
        }
        (r, jac)
    }
}

fn half_norm2(v: &[f64]) -> f64 {
    0.5 * v.iter().map(|x| x * x).sum::<f64>()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Certification residual: max deviation over the solve nodes and a denser
/// Chebyshev grid, evaluated through the reflection-convention response.
fn certify(phases: &[f64], target: &OddPolynomial) -> f64 {
    let n = (target.coeffs().len() * 4).max(16);
    solve_nodes(target.coeffs().len())
        .into_iter()
        .chain(solve_nodes(n))
        .map(|x| (reflection_response(phases, x).re - target.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// The odd polynomial `Re P̃` realized by reflection phases.
pub fn realized_polynomial(phases: &[f64]) -> Result<OddPolynomial> {
    let d = phases.len();
    if d.is_multiple_of(2) {
        return Err(Error::Domain(format!("phase count {d} is not odd")));
    }
    let full = chebyshev_coefficients(|x| reflection_response(phases, x).re, d, 2 * d + 2);
    OddPolynomial::from_full(&full, d)
}

/// Finds reflection phases whose real part matches `target` within `tol`.
pub fn solve_phases(target: &OddPolynomial, tolerance: f64) -> Result<PhaseSequence> {
    let d = target.degree();
    if d > tol::DEGREE_CAP {
        return Err(Error::Capacity(format!("degree {d} exceeds cap {}", tol::DEGREE_CAP)));
    }
    let coeffs = target.coeffs();
    let leading = coeffs[coeffs.len() - 1];
    if coeffs[..coeffs.len() - 1].iter().all(|&c| c == 0.0) && (leading.abs() - 1.0).abs() < 1e-15 {
        let phases = chebyshev_phases(d, leading < 0.0);
        let residual = certify(&phases, target);
        return PhaseSequence::new(phases, residual);
    }
    let n = coeffs.len();
    let nodes = solve_nodes(n);
    let targets: Vec<f64> = nodes.iter().map(|&x| target.eval(x)).collect();
    let loss = NodeLoss { d, nodes: &nodes, targets: &targets };
    let mut reduced = vec![0.0; n];
    reduced[0] = FRAC_PI_4;

    // Levenberg-Marquardt on ½‖r‖², i.e. Gauss-Newton curvature with adaptive damping.
    let (mut r, mut jac) = loss.residuals(&reduced);
    let mut cost = half_norm2(&r);
    let mut mu = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && max_abs(&r) > tolerance * 1e-2 {
        iterations += 1;
        let rv = DVector::from_vec(r.clone());
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &rv;
        let mut lhs = jtj.clone();
        for k in 0..lhs.nrows() {
            lhs[(k, k)] += mu * jtj[(k, k)].max(1e-12);
        }
        let Some(step) = lhs.cholesky().map(|ch| ch.solve(&g)) else {
            mu *= 10.0;
            continue;
        };
        let trial: Vec<f64> = reduced.iter().zip(step.iter()).map(|(p, s)| p - s).collect();
        let (rt, jt) = loss.residuals(&trial);
        let ct = half_norm2(&rt);
        if ct < cost {
            reduced = trial;
            r = rt;
            jac = jt;
            cost = ct;
            mu = (mu / 3.0).max(1e-15);
        } else {
            mu *= 4.0;
            if mu > 1e12 {
                break;
            }
        }
    }
    let phases = to_reflection(&full_phases(&reduced, d));
    let residual = certify(&phases, target);
    if residual > tolerance {
        return Err(Error::SolverFailure { iterations, best_residual: residual });
    }
    PhaseSequence::new(phases, residual)
}
