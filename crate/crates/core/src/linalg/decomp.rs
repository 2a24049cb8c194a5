use super::{cr, Mat, Vector, C64};
use crate::tol;

/// Thin SVD with singular values in descending order.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    /// `m × k` left singular vectors.
    pub left: Mat,
    /// `n × k` right singular vectors.
    pub right: Mat,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Mat {
        let mut scaled = self.left.clone();
        for (k, s) in self.singular_values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*s);
        }
        scaled * self.right.adjoint()
    }

    /// `Σ f(s_i) u_i v_i†`.
    pub fn transform(&self, f: impl Fn(f64) -> f64) -> Mat {
        let mut scaled = self.left.clone();
        for (k, s) in self.singular_values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(f(*s));
        }
        scaled * self.right.adjoint()
    }
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// nalgebra's bidiagonal SVD loses accuracy on rank-deficient complex input;
/// Jacobi keeps small singular values and vectors accurate to round-off.
pub fn svd(m: &Mat) -> SvdResult {
    let (r, c) = m.shape();
    if r < c {
        let t = svd(&m.adjoint());
        return SvdResult { singular_values: t.singular_values, left: t.right, right: t.left };
    }
    if c == 0 {
        return SvdResult { singular_values: vec![], left: Mat::zeros(r, 0), right: Mat::zeros(0, 0) };
    }
    let mut a = m.clone();
    let mut v = Mat::identity(c, c);
    let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..c - 1 {
            for q in p + 1..c {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha.sqrt() * beta.sqrt()) || g <= 1e-280 * scale.max(1.0) {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut a, p, q, cs, sn, phase);
                rotate(&mut v, p, q, cs, sn, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..c).map(|k| a.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let singular_values: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let right = Mat::from_columns(&order.iter().map(|&k| v.column(k)).collect::<Vec<_>>());
    let top = singular_values[0];
    let mut cols: Vec<Vector> = Vec::with_capacity(c);
    for (&k, &s) in order.iter().zip(&singular_values) {
        if s > top * 1e3 * f64::EPSILON && s > 0.0 {
            cols.push(a.column(k) / cr(s));
        } else {
            cols.push(complete_orthonormal(&cols, r));
        }
    }
    SvdResult { singular_values, left: Mat::from_columns(&cols), right }
}

// Columns (p, q) ← (c·x_p − s·e^{-iφ}·x_q, s·x_p + c·e^{-iφ}·x_q).
fn rotate(x: &mut Mat, p: usize, q: usize, cs: f64, sn: f64, phase: C64) {
    let w = phase.conj();
    for i in 0..x.nrows() {
        let xp = x[(i, p)];
        let xq = x[(i, q)] * w;
        x[(i, p)] = xp * cs - xq * sn;
        x[(i, q)] = xp * sn + xq * cs;
    }
}

/// A unit vector orthogonal to `cols` (Gram-Schmidt over the standard basis).
fn complete_orthonormal(cols: &[Vector], dim: usize) -> Vector {
    let mut best = Vector::zeros(dim);
    let mut best_norm = -1.0;
    for i in 0..dim {
        let mut e = super::basis_vector(dim, i);
        for _ in 0..2 {
            for u in cols {
                let proj = u.dotc(&e);
                e -= u * proj;
            }
        }
        let n = e.norm();
        if n > best_norm {
            best_norm = n;
            best = e;
        }
        if n > 0.5 {
            break;
        }
    }
    best / cr(best_norm)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, vectors as columns.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], Mat::zeros(0, 0));
    }
    let h = (m + m.adjoint()) * cr(0.5);
    let dec = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    let vals = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let vecs = Mat::from_columns(&order.iter().map(|&i| dec.eigenvectors.column(i)).collect::<Vec<_>>());
    (vals, vecs)
}

/// Square root of a PSD matrix. Negative eigenvalues down to `-PSD_CLAMP`, and
/// positive ones at round-off level, are set to zero.
/// Returns `None` if an eigenvalue lies below `-PSD_REJECT`.
pub fn psd_sqrt(m: &Mat) -> Option<Mat> {
    let (vals, vecs) = hermitian_eigen(m);
    if vals.iter().any(|&v| v < -tol::PSD_REJECT) {
        return None;
    }
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = (64.0 * f64::EPSILON * top * vals.len() as f64).max(tol::PSD_CLAMP);
    let mut scaled = vecs.clone();
    for (k, v) in vals.iter().enumerate() {
        let v = if *v <= floor { 0.0 } else { *v };
        scaled.column_mut(k).scale_mut(v.sqrt());
    }
    Some(scaled * vecs.adjoint())
}
