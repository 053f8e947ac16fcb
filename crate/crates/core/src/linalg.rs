//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] wraps a dynamically sized `nalgebra` matrix and exposes
//! the handful of operations the simulator needs: Kronecker products,
//! exponentials of Hermitian generators, partial traces and the norms that
//! enter every error metric.
//!
//! Tolerances are fixed once here and reused by every other module:
//! structural checks (Hermiticity, unitarity) use [`STRUCTURE_TOL`] and trace
//! preservation uses [`TRACE_TOL`].

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for Hermiticity and unitarity checks (max-entry norm).
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Tolerance for trace preservation.
pub const TRACE_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Self {
        Self(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// Outer product `|v><v|`.
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn inner_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        self.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.0[(row, col)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |h - h^dagger|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U U^dagger - I|` over all entries.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = &self.0 * self.0.adjoint();
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > STRUCTURE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(())
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect > STRUCTURE_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(())
    }

    /// `U self U^dagger`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.nrows();
        let m = self.ncols();
        assert_eq!(v.len(), m, "matvec dimension mismatch");
        (0..n)
            .map(|i| (0..m).fold(ZERO, |acc, k| acc + self.0[(i, k)] * v[k]))
            .collect()
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.nrows() * self.ncols());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) - &(b * a)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Evaluates `f` on the spectrum: `V diag(f(lambda)) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.vectors.0;
        let mut scaled = v.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fj;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    /// Largest `|H v - lambda v|` (2-norm) over all eigenpairs.
    pub fn max_residual(&self, h: &ComplexMatrix) -> f64 {
        let hv = &h.0 * &self.vectors.0;
        let mut worst = 0.0f64;
        for (j, &lambda) in self.values.iter().enumerate() {
            let r = hv.column(j) - self.vectors.0.column(j) * C64::new(lambda, 0.0);
            worst = worst.max(r.norm());
        }
        worst
    }
}

/// Hermitian eigensolver. The input is symmetrized before factorization.
pub fn eigh(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigh needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    h.ensure_hermitian()?;
    let sym = (&h.0 + h.0.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let n = h.dim();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(h: &ComplexMatrix) -> Result<Vec<f64>> {
    h.ensure_hermitian()?;
    let sym = (&h.0 + h.0.adjoint()) * C64::new(0.5, 0.0);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `exp(-i h t)` for Hermitian `h`, computed by diagonalization.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if t == 0.0 {
        h.ensure_hermitian()?;
        return Ok(ComplexMatrix::identity(h.dim()));
    }
    let eig = eigh(h)?;
    Ok(eig.map(|lambda| C64::from_polar(1.0, -lambda * t)))
}

/// Reduced state of one tensor factor of a bipartite operator on
/// `dim_sys * dim_bath` dimensions (system index is the slow one).
pub fn partial_trace(
    rho: &ComplexMatrix,
    dim_sys: usize,
    dim_bath: usize,
    keep_sys: bool,
) -> Result<ComplexMatrix> {
    let n = dim_sys * dim_bath;
    if !rho.is_square() || rho.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {n}x{n} for {dim_sys}x{dim_bath}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let m = &rho.0;
    let out = if keep_sys {
        ComplexMatrix::from_fn(dim_sys, dim_sys, |s, t| {
            (0..dim_bath).fold(ZERO, |acc, b| acc + m[(s * dim_bath + b, t * dim_bath + b)])
        })
    } else {
        ComplexMatrix::from_fn(dim_bath, dim_bath, |b, c| {
            (0..dim_sys).fold(ZERO, |acc, s| acc + m[(s * dim_bath + b, s * dim_bath + c)])
        })
    };
    Ok(out)
}

/// `||a||_1` for Hermitian `a`, via its eigenvalues.
pub fn trace_norm_hermitian(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigvalsh(a)?.iter().map(|x| x.abs()).sum())
}

/// `1/2 ||rho - sigma||_1` for density matrices.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.nrows() != sigma.nrows() || rho.ncols() != sigma.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance of {}x{} and {}x{}",
            rho.nrows(),
            rho.ncols(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let diff = rho - sigma;
    Ok((0.5 * trace_norm_hermitian(&diff)?).min(1.0))
}

/// Spectral norm (largest singular value).
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.0.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |m: f64, &s| m.max(s))
}

/// Max-entry distance between `a` and `b` after removing a global phase.
///
/// Both matrices are normalized by the phase of their largest-magnitude
/// entry (the position is taken from `a`).
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    let mut best = (0, 0);
    let mut best_abs = -1.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a.0[(i, j)].norm();
            if v > best_abs {
                best_abs = v;
                best = (i, j);
            }
        }
    }
    let pa = a.0[best];
    let pb = b.0[best];
    if pa.norm() == 0.0 {
        return b.max_abs();
    }
    if pb.norm() == 0.0 {
        return a.max_abs();
    }
    let ua = pa.conj() / pa.norm();
    let ub = pb.conj() / pb.norm();
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a.0[(i, j)] * ua - b.0[(i, j)] * ub).norm());
        }
    }
    worst
}
