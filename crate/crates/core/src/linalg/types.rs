use super::{max_abs_diff, product, Mat, Vector, C64};
use crate::error::{Error, Result};
use crate::tol;

/// A normalized pure state with a tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vector,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amps: Vector, dims: Vec<usize>) -> Result<Self> {
        if product(&dims) != amps.len() {
            return Err(Error::Dimension(format!("dims {:?} do not factor length {}", dims, amps.len())));
        }
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("state norm² = {n2}, expected 1")));
        }
        Ok(Self { amps, dims })
    }

    /// Normalizes `amps`; fails if its norm is (numerically) zero.
    pub fn normalized(amps: Vector, dims: Vec<usize>) -> Result<Self> {
        let n = amps.norm();
        if n * n < tol::DEGENERATE {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Self::new(amps / C64::new(n, 0.0), dims)
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Self {
        let d = product(&dims);
        Self { amps: super::basis_vector(d, index), dims }
    }

    pub fn amps(&self) -> &Vector {
        &self.amps
    }

    pub fn into_amps(self) -> Vector {
        self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn density(&self) -> Operator {
        Operator::square(&self.amps * self.amps.adjoint(), self.dims.clone()).expect("dims checked at construction")
    }

    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amps: self.amps.kronecker(&other.amps), dims }
    }
}

/// A dense matrix with row and column tensor factorizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: Mat,
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
}

impl Operator {
    pub fn new(mat: Mat, row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        if product(&row_dims) != mat.nrows() || product(&col_dims) != mat.ncols() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix vs row dims {:?}, col dims {:?}",
                mat.nrows(),
                mat.ncols(),
                row_dims,
                col_dims
            )));
        }
        Ok(Self { mat, row_dims, col_dims })
    }

    pub fn square(mat: Mat, dims: Vec<usize>) -> Result<Self> {
        Self::new(mat, dims.clone(), dims)
    }

    /// Square operator on a single subsystem.
    pub fn flat(mat: Mat) -> Self {
        let (r, c) = mat.shape();
        Self { mat, row_dims: vec![r], col_dims: vec![c] }
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn is_square(&self) -> bool {
        self.mat.nrows() == self.mat.ncols()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Operator {
        Self { mat: self.mat.adjoint(), row_dims: self.col_dims.clone(), col_dims: self.row_dims.clone() }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.mat, &self.mat.adjoint())
    }
}

/// An orthogonal projector, stored through an orthonormal basis of its range.
///
/// Keeping the basis makes `Π v` cost `O(D r)` and gives downstream code a
/// canonical coordinate system for the encoded block.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    basis: Mat,
    dims: Vec<usize>,
}

impl Projector {
    /// `basis` must have orthonormal columns.
    pub fn from_basis(basis: Mat, dims: Vec<usize>) -> Result<Self> {
        if product(&dims) != basis.nrows() {
            return Err(Error::Dimension(format!("projector basis has {} rows, dims {:?}", basis.nrows(), dims)));
        }
        let r = basis.ncols();
        let gram = basis.adjoint() * &basis;
        if max_abs_diff(&gram, &Mat::identity(r, r)) > tol::STRUCTURAL {
            return Err(Error::Domain("projector basis is not orthonormal".into()));
        }
        Ok(Self { basis, dims })
    }

    /// Projector onto the span of the listed computational basis states.
    pub fn basis_states(indices: &[usize], dims: Vec<usize>) -> Result<Self> {
        let d = product(&dims);
        let mut basis = Mat::zeros(d, indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if i >= d {
                return Err(Error::Dimension(format!("basis index {i} >= {d}")));
            }
            basis[(i, k)] = super::ONE;
        }
        Self::from_basis(basis, dims)
    }

    /// `|m⟩⟨m|` on the listed qubits of an `n`-qubit register, identity elsewhere.
    pub fn qubit_outcome(n_qubits: usize, qubits: &[usize], outcome: &[u8]) -> Result<Self> {
        if qubits.len() != outcome.len() || qubits.iter().any(|&q| q >= n_qubits) {
            return Err(Error::Dimension("measured qubits / outcome mismatch".into()));
        }
        let dims = vec![2; n_qubits];
        let indices: Vec<usize> = (0..1usize << n_qubits)
            .filter(|&i| qubits.iter().zip(outcome).all(|(&q, &m)| ((i >> (n_qubits - 1 - q)) & 1) as u8 == m))
            .collect();
        Self::basis_states(&indices, dims)
    }

    /// Recovers a projector from its matrix (eigenvalues must be 0 or 1).
    pub fn from_operator(op: &Operator) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::Dimension("projector must be square".into()));
        }
        if op.hermiticity_defect() > tol::STRUCTURAL {
            return Err(Error::Domain("projector not Hermitian".into()));
        }
        let (vals, vecs) = super::hermitian_eigen(op.mat());
        let mut cols = Vec::new();
        for (k, &v) in vals.iter().enumerate() {
            if (v - 1.0).abs() < 1e-8 {
                cols.push(vecs.column(k).into_owned());
            } else if v.abs() > 1e-8 {
                return Err(Error::Domain(format!("eigenvalue {v} is not 0 or 1")));
            }
        }
        let d = op.mat().nrows();
        let basis = if cols.is_empty() { Mat::zeros(d, 0) } else { Mat::from_columns(&cols) };
        Self::from_basis(basis, op.row_dims().to_vec())
    }

    /// `I_left ⊗ self ⊗ I_right` for identity factors of the given dims.
    pub fn embed(&self, left: &[usize], right: &[usize]) -> Projector {
        let dl = product(left);
        let dr = product(right);
        let basis = Mat::identity(dl, dl).kronecker(&self.basis).kronecker(&Mat::identity(dr, dr));
        let mut dims = left.to_vec();
        dims.extend_from_slice(&self.dims);
        dims.extend_from_slice(right);
        Projector { basis, dims }
    }

    pub fn tensor(&self, other: &Projector) -> Projector {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Projector { basis: self.basis.kronecker(&other.basis), dims }
    }

    pub fn identity(dims: Vec<usize>) -> Projector {
        let d = product(&dims);
        Projector { basis: Mat::identity(d, d), dims }
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn matrix(&self) -> Mat {
        &self.basis * self.basis.adjoint()
    }

    pub fn operator(&self) -> Operator {
        Operator::square(self.matrix(), self.dims.clone()).expect("dims checked")
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.basis * (self.basis.adjoint() * v)
    }

    /// `Π X` for a block of column vectors.
    pub fn apply_cols(&self, x: &Mat) -> Mat {
        &self.basis * (self.basis.adjoint() * x)
    }

    /// Expectation `⟨ψ|Π|ψ⟩`.
    pub fn expectation(&self, v: &Vector) -> f64 {
        (self.basis.adjoint() * v).norm_squared()
    }
}
