//! Dense complex linear algebra and quantum-information primitives.
//!
//! Subsystems are ordered big-endian: for dims `[d0, d1, ..]` the flat index
//! is `i0 * (d1 * ..) + i1 * (..) + ..`.

mod decomp;
mod local;
mod qinfo;
mod random;
mod types;

pub use decomp::{hermitian_eigen, psd_sqrt, svd, SvdResult};
pub use local::{apply_local, apply_local_cols, embed_local};
pub use qinfo::{epr_state, fidelity, partial_trace, purity_renyi2, reduced_density};
pub use random::{complete_unitary, haar_isometry, haar_unitary, random_state, rng_for, Rng};
pub use types::{Operator, Projector, StateVector};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn identity(d: usize) -> Mat {
    Mat::identity(d, d)
}

/// Deviation of `u` from unitarity, `‖U†U − I‖_max`.
pub fn unitarity_defect(u: &Mat) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

pub fn basis_vector(dim: usize, index: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    v[index] = ONE;
    v
}

pub fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Mixed-radix digits of `index` for the given dims.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

pub fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}
