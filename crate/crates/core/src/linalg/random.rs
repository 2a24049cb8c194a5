use super::{c, cr, Mat, Vector};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = rand_chacha::ChaCha8Rng;

/// Independent generator for `(seed, stream)`; streams never overlap.
pub fn rng_for(seed: u64, stream: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut Rng) -> num_complex::Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im) * cr(std::f64::consts::FRAC_1_SQRT_2)
}

/// Haar-distributed `rows × cols` isometry (QR of a Gaussian matrix, R-diagonal phases fixed).
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut Rng) -> Result<Mat> {
    if cols > rows {
        return Err(Error::Dimension(format!("isometry needs cols <= rows, got {rows}x{cols}")));
    }
    if cols == 0 {
        return Ok(Mat::zeros(rows, 0));
    }
    let g = Mat::from_fn(rows, cols, |_, _| gaussian(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / cr(d.norm()) } else { cr(1.0) };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    Ok(q)
}

pub fn haar_unitary(d: usize, rng: &mut Rng) -> Mat {
    haar_isometry(d, d, rng).expect("square isometry")
}

/// Haar-random pure state amplitudes.
pub fn random_state(d: usize, rng: &mut Rng) -> Vector {
    let v = Vector::from_fn(d, |_, _| gaussian(rng));
    let n = v.norm();
    v / cr(n)
}

/// Extends orthonormal columns `w` to a unitary; `w` fills the leading
/// columns and the complement is Haar-random.
pub fn complete_unitary(w: &Mat, rng: &mut Rng) -> Result<Mat> {
    let (rows, cols) = w.shape();
    if cols > rows {
        return Err(Error::Dimension(format!("cannot complete {rows}x{cols} to a unitary")));
    }
    let defect = (w.adjoint() * w - Mat::identity(cols, cols)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::Domain(format!("columns are not orthonormal (defect {defect:.3e})")));
    }
    let g = Mat::from_fn(rows, rows - cols, |_, _| gaussian(rng));
    let mut full = Mat::zeros(rows, rows);
    full.columns_mut(0, cols).copy_from(w);
    full.columns_mut(cols, rows - cols).copy_from(&g);
    let mut q = full.qr().q();
    // Q spans W in its leading columns up to phases; put W back exactly.
    q.columns_mut(0, cols).copy_from(w);
    Ok(q)
}
