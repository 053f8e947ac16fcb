//! Double-double ("extended", ~32 significant digits) complex arithmetic for
//! pure-state propagation: matrices, exponentials and the trace distance of a
//! mixture of pure states.

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::linalg::{ComplexMatrix, C64};
use crate::model::{PauliAction, Phase};

/// Double-double real scalar.
pub type Real = TwoFloat;
/// Double-double complex scalar.
pub type Cdd = Complex<TwoFloat>;

const TAYLOR_DEGREE: usize = 20;
const PS_BLOCK: usize = 5;
const SCALE_TARGET: f64 = 0.25;

pub fn dd(x: f64) -> Real {
    TwoFloat::from(x)
}

/// `a / b` to double-double accuracy: an f64 estimate refined by two
/// residual corrections.
pub fn quotient(a: Real, b: Real) -> Real {
    let q0 = a.hi() / b.hi();
    let r = a - b * q0;
    let q1 = r.hi() / b.hi();
    let r = r - b * q1;
    let q2 = r.hi() / b.hi();
    TwoFloat::new_add(q0, q1) + q2
}

pub fn cdd(z: C64) -> Cdd {
    Complex::new(dd(z.re), dd(z.im))
}

pub fn czero() -> Cdd {
    Complex::new(dd(0.0), dd(0.0))
}

pub fn to_c64(z: Cdd) -> C64 {
    C64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

pub fn to_extended(v: &[C64]) -> Vec<Cdd> {
    v.iter().map(|&z| cdd(z)).collect()
}

pub fn to_double(v: &[Cdd]) -> Vec<C64> {
    v.iter().map(|&z| to_c64(z)).collect()
}

/// Multiplies by an exact unit phase without rounding.
pub fn phase_mul(p: Phase, z: Cdd) -> Cdd {
    match p.power() {
        0 => z,
        1 => Complex::new(-z.im, z.re),
        2 => Complex::new(-z.re, -z.im),
        _ => Complex::new(z.im, -z.re),
    }
}

/// `P (x) I_bath` applied to an extended joint vector.
pub fn apply_pauli(action: &PauliAction, v: &[Cdd], dim_bath: usize) -> Vec<Cdd> {
    action.apply_vec(v, dim_bath, phase_mul)
}

fn mul_add(acc: Cdd, a: Cdd, b: Cdd) -> Cdd {
    Complex::new(
        acc.re + a.re * b.re - a.im * b.im,
        acc.im + a.re * b.im + a.im * b.re,
    )
}

pub fn norm_sqr(v: &[Cdd]) -> Real {
    v.iter().fold(dd(0.0), |s, z| s + z.re * z.re + z.im * z.im)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner(a: &[Cdd], b: &[Cdd]) -> Cdd {
    a.iter().zip(b).fold(czero(), |s, (x, y)| mul_add(s, x.conj(), *y))
}

/// Dense square matrix of double-double complex entries, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DdMatrix {
    n: usize,
    data: Vec<Cdd>,
}

impl DdMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![czero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = cdd(C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_complex(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "extended matrices are square");
        let n = m.nrows();
        let data = m.to_row_major().into_iter().map(cdd).collect();
        Self { n, data }
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(self.n, self.n, &to_double(&self.data))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Cdd {
        self.data[r * self.n + c]
    }

    pub fn conj_transpose(&self) -> DdMatrix {
        let n = self.n;
        let data = (0..n * n).map(|k| self.data[(k % n) * n + k / n].conj()).collect();
        Self { n, data }
    }

    pub fn add(&self, other: &DdMatrix) -> DdMatrix {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { n: self.n, data }
    }

    pub fn scale(&self, s: Cdd) -> DdMatrix {
        let data = self.data.iter().map(|&a| a * s).collect();
        Self { n: self.n, data }
    }

    pub fn matmul(&self, other: &DdMatrix) -> DdMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![czero(); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(b_row) {
                    *o = mul_add(*o, a, b);
                }
            }
        }
        Self { n, data: out }
    }

    pub fn matvec(&self, v: &[Cdd]) -> Vec<Cdd> {
        assert_eq!(self.n, v.len());
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(v).fold(czero(), |s, (a, x)| mul_add(s, *a, *x)))
            .collect()
    }

    /// Maximum absolute column sum, in double precision.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|c| (0..self.n).map(|r| to_c64(self.get(r, c)).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DdMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| to_c64(a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `exp(-i t h)` for Hermitian `h`, via scaling and squaring around a
/// degree-20 Taylor polynomial evaluated in Paterson-Stockmeyer form.
pub fn expm_neg_i(h: &DdMatrix, t: f64) -> DdMatrix {
    let n = h.dim();
    let x = h.scale(Complex::new(dd(0.0), dd(-t)));
    let norm = x.norm1();
    let mut squarings = 0u32;
    if norm > SCALE_TARGET {
        squarings = (norm / SCALE_TARGET).log2().ceil() as u32;
    }
    let x = x.scale(cdd(C64::new(0.5f64.powi(squarings as i32), 0.0)));

    let mut coeffs = Vec::with_capacity(TAYLOR_DEGREE + 1);
    let mut c = dd(1.0);
    coeffs.push(c);
    for k in 1..=TAYLOR_DEGREE {
        c /= k as f64;
        coeffs.push(c);
    }

    let mut powers = vec![DdMatrix::identity(n), x.clone()];
    for _ in 2..=PS_BLOCK {
        let next = powers.last().unwrap().matmul(&x);
        powers.push(next);
    }
    let block = |j: usize| -> DdMatrix {
        let mut b = DdMatrix::zeros(n);
        for i in 0..PS_BLOCK {
            let k = j * PS_BLOCK + i;
            if k > TAYLOR_DEGREE {
                break;
            }
            b = b.add(&powers[i].scale(Complex::new(coeffs[k], dd(0.0))));
        }
        b
    };
    let blocks = TAYLOR_DEGREE / PS_BLOCK;
    let top = &powers[PS_BLOCK];
    let mut result = block(blocks);
    for j in (0..blocks).rev() {
        result = result.matmul(top).add(&block(j));
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Eigenvalues of a real symmetric matrix (row-major, `m x m`) by cyclic Jacobi.
fn symmetric_eigenvalues(mut a: Vec<Real>, m: usize) -> Vec<Real> {
    let scale: f64 = a.iter().map(|x| x.hi().abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return vec![dd(0.0); m];
    }
    let tol = scale * 1e-33;
    for _ in 0..60 {
        let off: f64 = (0..m)
            .flat_map(|p| (0..m).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * m + q].hi().abs())
            .fold(0.0, f64::max);
        if off <= tol {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.hi().abs() <= tol {
                    continue;
                }
                let zeta = quotient(a[q * m + q] - a[p * m + p], dd(2.0) * apq);
                let root = (dd(1.0) + zeta * zeta).sqrt();
                let t = if zeta.hi() >= 0.0 {
                    quotient(dd(1.0), zeta + root)
                } else {
                    quotient(dd(-1.0), root - zeta)
                };
                let c = quotient(dd(1.0), (dd(1.0) + t * t).sqrt());
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[i * m + i]).collect()
}

/// Trace distance between `sum_i w_i |v_i><v_i|` and `|target><target|`.
///
/// The vectors span a space of dimension at most `len + 1`; the operator is
/// compressed onto an orthonormal basis of that span (modified Gram-Schmidt
/// with one reorthogonalization pass) and diagonalized there.
pub fn mixture_trace_distance(weights: &[f64], states: &[Vec<Cdd>], target: &[Cdd]) -> f64 {
    assert_eq!(weights.len(), states.len());
    let mut vectors: Vec<&[Cdd]> = states.iter().map(|v| v.as_slice()).collect();
    vectors.push(target);
    let mut coeffs: Vec<Real> = weights.iter().map(|&w| dd(w)).collect();
    coeffs.push(dd(-1.0));

    let count = vectors.len();
    let mut basis: Vec<Vec<Cdd>> = Vec::new();
    // columns[k][j] = <q_j | u_k>
    let mut columns: Vec<Vec<Cdd>> = Vec::with_capacity(count);
    for u in &vectors {
        let reference = norm_sqr(u).sqrt();
        let mut r = u.to_vec();
        let mut proj = vec![czero(); basis.len()];
        for _ in 0..2 {
            for (j, q) in basis.iter().enumerate() {
                let c = inner(q, &r);
                proj[j] += c;
                for (x, y) in r.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let rn = norm_sqr(&r).sqrt();
        if rn.hi() > 1e-30 * reference.hi() {
            let inv = quotient(dd(1.0), rn);
            basis.push(r.iter().map(|z| Complex::new(z.re * inv, z.im * inv)).collect());
            proj.push(Complex::new(rn, dd(0.0)));
        }
        columns.push(proj);
    }

    let r = basis.len();
    // Compressed operator A_{ab} = sum_k c_k R_{ak} conj(R_{bk}).
    let mut a = vec![czero(); r * r];
    for (k, col) in columns.iter().enumerate() {
        for ia in 0..col.len() {
            for ib in 0..col.len() {
                let v = col[ia] * col[ib].conj();
                a[ia * r + ib] += Complex::new(v.re * coeffs[k], v.im * coeffs[k]);
            }
        }
    }
    // Real symmetric embedding [[Re, -Im], [Im, Re]] doubles each eigenvalue.
    let m = 2 * r;
    let mut emb = vec![dd(0.0); m * m];
    for i in 0..r {
        for j in 0..r {
            let z = a[i * r + j];
            emb[i * m + j] = z.re;
            emb[(i + r) * m + (j + r)] = z.re;
            emb[i * m + (j + r)] = -z.im;
            emb[(i + r) * m + j] = z.im;
        }
    }
    let total = symmetric_eigenvalues(emb, m)
        .into_iter()
        .fold(dd(0.0), |s, x| s + x.abs());
    let value = (total / 4.0).hi();
    value.clamp(0.0, 1.0)
}
