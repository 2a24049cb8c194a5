use super::{cr, digits, from_digits, product, psd_sqrt, Mat, Operator, StateVector, Vector, ZERO};
use crate::error::{Error, Result};
use crate::tol;

fn split_indices(dims: &[usize], keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("invalid keep set {keep:?} for dims {dims:?}")));
    }
    // For every flat index: position within the kept factor and within the traced factor.
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let d = product(dims);
    let mut kidx = Vec::with_capacity(d);
    let mut tidx = Vec::with_capacity(d);
    for i in 0..d {
        let dg = digits(i, dims);
        let kd: Vec<usize> = keep.iter().map(|&k| dg[k]).collect();
        let td: Vec<usize> = traced.iter().map(|&k| dg[k]).collect();
        kidx.push(from_digits(&kd, &keep_dims));
        tidx.push(from_digits(&td, &traced_dims));
    }
    Ok((kidx, tidx))
}

/// Partial trace keeping the listed subsystems, in the listed order.
pub fn partial_trace(op: &Operator, keep: &[usize]) -> Result<Operator> {
    if op.row_dims() != op.col_dims() {
        return Err(Error::Dimension("partial trace needs matching row/col dims".into()));
    }
    let dims = op.row_dims();
    let (kidx, tidx) = split_indices(dims, keep)?;
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let dk = product(&keep_dims);
    let dt = product(dims) / dk.max(1);
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dt];
    for (i, (&k, &t)) in kidx.iter().zip(&tidx).enumerate() {
        groups[t].push((i, k));
    }
    let m = op.mat();
    let mut out = Mat::zeros(dk, dk);
    for g in &groups {
        for &(i, a) in g {
            for &(j, b) in g {
                out[(a, b)] += m[(i, j)];
            }
        }
    }
    Operator::square(out, keep_dims)
}

/// Reduced density matrix of a pure state (unnormalized vectors allowed).
pub fn reduced_density(amps: &Vector, dims: &[usize], keep: &[usize]) -> Result<Mat> {
    if product(dims) != amps.len() {
        return Err(Error::Dimension("state length does not match dims".into()));
    }
    let (kidx, tidx) = split_indices(dims, keep)?;
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt = amps.len() / dk.max(1);
    let mut a = Mat::zeros(dk, dt);
    for i in 0..amps.len() {
        a[(kidx[i], tidx[i])] = amps[i];
    }
    Ok(&a * a.adjoint())
}

fn check_density(rho: &Operator, name: &str) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::Dimension(format!("{name} is not square")));
    }
    if rho.hermiticity_defect() > tol::STATISTICAL {
        return Err(Error::Domain(format!("{name} is not Hermitian")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol::STATISTICAL || tr.im.abs() > tol::STATISTICAL {
        return Err(Error::Domain(format!("{name} has trace {tr}")));
    }
    Ok(())
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &Operator, sigma: &Operator) -> Result<f64> {
    check_density(rho, "rho")?;
    check_density(sigma, "sigma")?;
    if rho.mat().shape() != sigma.mat().shape() {
        return Err(Error::Dimension("fidelity arguments differ in shape".into()));
    }
    let sr = psd_sqrt(rho.mat()).ok_or_else(|| Error::Domain("rho is not PSD".into()))?;
    let ss = psd_sqrt(sigma.mat()).ok_or_else(|| Error::Domain("sigma is not PSD".into()))?;
    // tr √(√ρ σ √ρ) is the trace norm of √ρ √σ; singular values avoid
    // square roots of round-off eigenvalues.
    let t: f64 = super::svd(&(&sr * &ss)).singular_values.iter().sum();
    Ok((t * t).clamp(0.0, 1.0))
}

/// `(tr ρ², −ln tr ρ²)`.
pub fn purity_renyi2(rho: &Operator) -> (f64, f64) {
    let m = rho.mat();
    // tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
    let p: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    (p, -p.ln())
}

/// `Σ_a |a⟩|a⟩ / √d` on `d × d`.
pub fn epr_state(d: usize) -> StateVector {
    let mut v = Vector::from_element(d * d, ZERO);
    let amp = cr(1.0 / (d as f64).sqrt());
    for a in 0..d {
        v[a * d + a] = amp;
    }
    StateVector::new(v, vec![d, d]).expect("EPR state is normalized")
}
