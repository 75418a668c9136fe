//! Small dense matrices: the Anderson Gram systems and GMRES Hessenberg
//! blocks. Sizes are bounded by the history length or restart length.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { nrows, ncols, data }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul: inner dimensions differ");
        let mut c = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                for j in 0..other.ncols {
                    c[(i, j)] += a * other[(k, j)];
                }
            }
        }
        c
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, x.len(), "matvec: dimension mismatch");
        (0..self.nrows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.ncols {
                    acc += self[(i, j)] * x[j];
                }
                acc
            })
            .collect()
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v.abs_sq()).sum())
    }

    fn off_diagonal_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                if i != j {
                    s += self[(i, j)].abs_sq();
                }
            }
        }
        s
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }
}

/// Eigenvalues and unitary eigenvectors (columns) of a hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix<T>,
}

const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigendecomposition of a hermitian matrix. Only the lower
/// and upper triangles' agreement is assumed, not checked.
pub fn hermitian_eigen<T: Scalar>(g: &DenseMatrix<T>) -> HermitianEigen<T> {
    assert_eq!(g.nrows, g.ncols, "hermitian_eigen: matrix must be square");
    let n = g.nrows;
    let mut a = g.clone();
    for i in 0..n {
        a[(i, i)] = T::from_real(a[(i, i)].re());
    }
    let mut v = DenseMatrix::identity(n);
    let total = a.norm_fro();
    let tiny = f64::EPSILON * f64::EPSILON * total * total;

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_sq() <= tiny {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    HermitianEigen { values: (0..n).map(|i| a[(i, i)].re()).collect(), vectors: v }
}

/// One Jacobi rotation zeroing `a[(p, q)]`. The complex phase of the pivot
/// is absorbed first, then a real symmetric rotation finishes the job.
fn rotate<T: Scalar>(a: &mut DenseMatrix<T>, v: &mut DenseMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.abs();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re();
    let aqq = a[(q, q)].re();
    let phase_conj = (apq / T::from_real(mag)).conj();

    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + libm::sqrt(theta * theta + 1.0))
    } else {
        -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;

    // U restricted to (p, q): [[c, s], [-s·e*, c·e*]] with e* = conj(phase)
    let upp = T::from_real(c);
    let upq = T::from_real(s);
    let uqp = phase_conj.scale(-s);
    let uqq = phase_conj.scale(c);

    let n = a.nrows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = T::zero();
    a[(q, p)] = T::zero();
    a[(p, p)] = T::from_real(a[(p, p)].re());
    a[(q, q)] = T::from_real(a[(q, q)].re());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}

impl<T: Scalar> HermitianEigen<T> {
    /// Eigenvalues kept by the truncation rule `|λ| > rcond · max|λ|`.
    pub fn retained(&self, rcond: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        let cutoff = rcond * self.values.iter().fold(0.0f64, |m, &l| m.max(libm::fabs(l)));
        self.values.iter().copied().enumerate().filter(move |&(_, l)| libm::fabs(l) > cutoff)
    }

    /// `pinv(G) · g` without forming the pseudoinverse.
    pub fn pinv_apply(&self, g: &[T], rcond: f64) -> Vec<T> {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = vec![T::zero(); n];
        for (k, lambda) in self.retained(rcond) {
            let mut proj = T::zero();
            for i in 0..n {
                proj += v[(i, k)].conj() * g[i];
            }
            let coeff = proj.scale(1.0 / lambda);
            for i in 0..n {
                out[i] += v[(i, k)] * coeff;
            }
        }
        out
    }
}

/// Moore-Penrose pseudoinverse of a small hermitian matrix by spectral
/// truncation: eigenvalues with `|λ| ≤ rcond · max|λ|` are dropped.
pub fn pseudoinverse<T: Scalar>(g: &DenseMatrix<T>, rcond: f64) -> DenseMatrix<T> {
    let eig = hermitian_eigen(g);
    let n = g.nrows;
    let v = &eig.vectors;
    let mut out = DenseMatrix::zeros(n, n);
    for (k, lambda) in eig.retained(rcond) {
        let inv = 1.0 / lambda;
        for i in 0..n {
            let vik = v[(i, k)].scale(inv);
            for j in 0..n {
                out[(i, j)] += vik * v[(j, k)].conj();
            }
        }
    }
    out
}
