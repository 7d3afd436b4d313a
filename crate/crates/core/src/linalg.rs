//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is a row-major matrix of `Complex64` entries and is the
//! carrier for Hamiltonians, density matrices, projectors and superoperators
//! throughout the crate. Problem sizes are small (at most a few hundred rows),
//! so everything is dense. Products, Kronecker products and partial traces are
//! implemented here directly; Hermitian eigendecomposition, singular values
//! and the matrix exponential go through `nalgebra`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for structural predicates (Hermiticity, unitarity, trace).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for reconstruction residuals such as `V diag(w) V† - M`.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "ComplexMatrix::from_vec",
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real row slices.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Max-entry deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && (&self.matmul(&self.dagger()) - &Self::identity(self.rows)).max_abs() <= tol
    }

    /// Hermitian, unit trace and positive semidefinite, all within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        self.check_density(tol).is_ok()
    }

    pub fn check_density(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotDensity {
                reason: format!("shape {}x{} is not square", self.rows, self.cols),
            });
        }
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotDensity {
                reason: format!("not Hermitian (deviation {dev:.3e})"),
            });
        }
        let tr = self.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::NotDensity {
                reason: format!("trace {tr} differs from 1"),
            });
        }
        let eig = eig_hermitian_unchecked(self);
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::NotDensity {
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(())
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "add_assign: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product: `(a⊗b)[i·rb + k, j·cb + l] = a[i,j]·b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Reduced matrix on subsystem `keep` of a square matrix over the tensor
/// product of spaces with dimensions `dims` (first factor most significant).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: usize) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: format!("square matrix of size {total} (dims {dims:?})"),
            found: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    if keep >= dims.len() {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: format!("subsystem index below {}", dims.len()),
            found: keep.to_string(),
        });
    }
    let d_keep = dims[keep];
    let inner: usize = dims[keep + 1..].iter().product();
    let outer: usize = dims[..keep].iter().product();
    let mut out = ComplexMatrix::zeros(d_keep, d_keep);
    for a in 0..d_keep {
        for b in 0..d_keep {
            let mut acc = ZERO;
            for o in 0..outer {
                for r in 0..inner {
                    let row = (o * d_keep + a) * inner + r;
                    let col = (o * d_keep + b) * inner + r;
                    acc += m[(row, col)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix: `m = V·diag(values)·V†`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d: Vec<C64> = self.values.iter().map(|&w| C64::new(w, 0.0)).collect();
        self.vectors
            .matmul(&ComplexMatrix::from_diagonal(&d))
            .matmul(&self.vectors.dagger())
    }
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let dev = m.hermiticity_deviation();
    if dev > STRUCTURAL_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(eig_hermitian_unchecked(m))
}

fn eig_hermitian_unchecked(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.rows();
    // Symmetrize so that roundoff-level anti-Hermitian parts do not leak in.
    let herm = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = nalgebra::SymmetricEigen::new(herm.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Matrix exponential (Padé scaling-and-squaring).
pub fn expm(m: &ComplexMatrix) -> ComplexMatrix {
    assert!(m.is_square(), "expm requires a square matrix");
    ComplexMatrix::from_nalgebra(&m.to_nalgebra().exp())
}

/// Eigenvalues of a general square matrix, from its complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    assert!(m.is_square(), "eigenvalues requires a square matrix");
    nalgebra::Schur::try_new(m.to_nalgebra(), 1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))
}

/// Orthonormal basis (as columns) of the null space of `m`, using singular
/// values below `tol · max(1, σ_max)`.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let n = m.cols();
    let svd = m.to_nalgebra().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = tol * smax.max(1.0);
    // Rows of V^T beyond rank(m) (or with tiny singular values) span the kernel.
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for k in 0..v_t.nrows() {
        let s = svd.singular_values.get(k).copied().unwrap_or(0.0);
        if s <= cut {
            cols.push((0..n).map(|j| v_t[(k, j)].conj()).collect());
        }
    }
    // Wide matrices have an implicit kernel beyond min(rows, cols).
    if v_t.nrows() < n {
        let mut basis = ComplexMatrix::zeros(n, v_t.nrows());
        for k in 0..v_t.nrows() {
            for j in 0..n {
                basis[(j, k)] = v_t[(k, j)].conj();
            }
        }
        let proj = &ComplexMatrix::identity(n) - &basis.matmul(&basis.dagger());
        let eig = eig_hermitian_unchecked(&proj);
        for (k, &w) in eig.values.iter().enumerate() {
            if w > 0.5 {
                cols.push((0..n).map(|j| eig.vectors[(j, k)]).collect());
            }
        }
    }
    ComplexMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Solves `a·x = b` for square, nonsingular `a`.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let lu = a.to_nalgebra().lu();
    lu.solve(&b.to_nalgebra())
        .map(|x| ComplexMatrix::from_nalgebra(&x))
        .ok_or_else(|| Error::Numerical("singular linear system".into()))
}
