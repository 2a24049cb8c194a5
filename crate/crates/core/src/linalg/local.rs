use super::{product, Mat, C64, ZERO};

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Applies `gate` (acting on `targets`, in that order) in place to a flat amplitude slice.
///
/// Panics if the gate size does not match the target dims; callers validate first.
pub fn apply_local(amps: &mut [C64], gate: &Mat, targets: &[usize], dims: &[usize]) {
    let stride = strides(dims);
    let tdims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let g = product(&tdims);
    assert_eq!(gate.nrows(), g, "gate size does not match target dims");
    assert_eq!(amps.len(), product(dims));
    let offsets: Vec<usize> =
        (0..g).map(|k| super::digits(k, &tdims).iter().zip(targets).map(|(d, &t)| d * stride[t]).sum()).collect();
    let mut buf = vec![ZERO; g];
    for base in 0..amps.len() {
        if targets.iter().any(|&t| !(base / stride[t]).is_multiple_of(dims[t])) {
            continue;
        }
        for (b, &o) in buf.iter_mut().zip(&offsets) {
            *b = amps[base + o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (cidx, b) in buf.iter().enumerate() {
                acc += gate[(r, cidx)] * b;
            }
            amps[base + o] = acc;
        }
    }
}

/// Applies `gate` to every column of `m` (i.e. `m ← G m`).
pub fn apply_local_cols(m: &mut Mat, gate: &Mat, targets: &[usize], dims: &[usize]) {
    let rows = m.nrows();
    if rows == 0 {
        return;
    }
    for col in m.as_mut_slice().chunks_mut(rows) {
        apply_local(col, gate, targets, dims);
    }
}

/// Full matrix of `gate` acting on `targets`, identity elsewhere.
pub fn embed_local(gate: &Mat, targets: &[usize], dims: &[usize]) -> Mat {
    let d = product(dims);
    let mut m = Mat::identity(d, d);
    apply_local_cols(&mut m, gate, targets, dims);
    m
}
