//! Compressed sparse row storage and the dense-vector kernels the solvers
//! are built from.
//!
//! All reductions accumulate sequentially in index order, so repeated calls
//! on the same data are bit-identical.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A sparse matrix in canonical CSR form: column indices strictly increase
/// within each row. Explicit zeros are kept, so the stored pattern is
/// exactly what the caller supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Assembles a canonical CSR matrix from `(row, col, value)` triplets.
    /// Duplicates are summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, T)]) -> Result<Self> {
        for (index, &(row, col, _)) in entries.iter().enumerate() {
            if row >= nrows || col >= ncols {
                return Err(Error::IndexOutOfRange { index, row, col, nrows, ncols });
            }
        }

        // Bucket by row (stable), then sort each row by column.
        let mut counts = vec![0usize; nrows + 1];
        for &(row, _, _) in entries {
            counts[row + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut order = vec![0usize; entries.len()];
        for (k, &(row, _, _)) in entries.iter().enumerate() {
            order[next[row]] = k;
            next[row] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_offsets.push(0);
        for i in 0..nrows {
            let bucket = &mut order[counts[i]..counts[i + 1]];
            bucket.sort_by_key(|&k| entries[k].1);
            let mut last: Option<usize> = None;
            for &k in bucket.iter() {
                let (_, col, v) = entries[k];
                if last == Some(col) {
                    *values.last_mut().expect("row has an entry") += v;
                } else {
                    col_indices.push(col);
                    values.push(v);
                    last = Some(col);
                }
            }
            row_offsets.push(col_indices.len());
        }

        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    /// Wraps raw CSR arrays after checking every canonical-form invariant.
    pub fn from_raw_parts(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidStructure("row_offsets must have nrows + 1 entries"));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("row_offsets[0] must be 0"));
        }
        if row_offsets[nrows] != col_indices.len() || col_indices.len() != values.len() {
            return Err(Error::InvalidStructure("row_offsets[nrows] must equal the number of entries"));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::InvalidStructure("row_offsets must be nondecreasing"));
            }
            let cols = &col_indices[lo..hi];
            if cols.iter().any(|&c| c >= ncols) {
                return Err(Error::InvalidStructure("column index out of range"));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure("column indices must strictly increase within a row"));
            }
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Builds a matrix with `diag` on the diagonal and nothing else.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }
    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    #[inline]
    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }
    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_range(i);
        (&self.col_indices[r.clone()], &self.values[r])
    }

    #[inline]
    pub(crate) fn row_range(&self, i: usize) -> Range<usize> {
        self.row_offsets[i]..self.row_offsets[i + 1]
    }

    /// Stored value at `(i, j)`, if the position is in the pattern.
    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    /// Stored diagonal, `None` where the diagonal position is not in the pattern.
    pub fn diagonal(&self) -> Vec<Option<T>> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Iterates over stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let r = self.row_range(i);
            self.col_indices[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let entries: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &entries).expect("transposed indices stay in range")
    }

    /// Applies `f` to every stored value, keeping the pattern.
    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// The square diagonal block spanning `rows` × `rows`, reindexed from zero.
    pub fn diagonal_block(&self, rows: Range<usize>) -> Self {
        let (lo, hi) = (rows.start, rows.end);
        let mut row_offsets = Vec::with_capacity(hi - lo + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j >= lo && j < hi {
                    col_indices.push(j - lo);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self { nrows: hi - lo, ncols: hi - lo, row_offsets, col_indices, values }
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>> {
        check_len(self.ncols, x.len())?;
        let mut y = vec![T::zero(); self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` into a caller-provided buffer. Panics on length mismatch.
    pub fn spmv_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols, "spmv: x has the wrong length");
        assert_eq!(y.len(), self.nrows, "spmv: y has the wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_range(i);
            let mut acc = T::zero();
            for (&j, &a) in self.col_indices[r.clone()].iter().zip(&self.values[r]) {
                acc += a * x[j];
            }
            *yi = acc;
        }
    }

    /// `out = b - A x`.
    pub fn residual_into(&self, b: &[T], x: &[T], out: &mut [T]) {
        assert_eq!(b.len(), self.nrows, "residual: b has the wrong length");
        self.spmv_into(x, out);
        for (o, &bi) in out.iter_mut().zip(b) {
            *o = bi - *o;
        }
    }
}

#[inline]
pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Conjugate-linear inner product `Σ conj(u_i) v_i`.
pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    check_len(u.len(), v.len())?;
    Ok(dot_unchecked(u, v))
}

#[inline]
pub(crate) fn dot_unchecked<T: Scalar>(u: &[T], v: &[T]) -> T {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = T::zero();
    for (&a, &b) in u.iter().zip(v) {
        acc += a.conj() * b;
    }
    acc
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(v: &[T]) -> f64 {
    let mut acc = 0.0;
    for &a in v {
        acc += a.abs_sq();
    }
    libm::sqrt(acc)
}

/// `y += a x`.
#[inline]
pub(crate) fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub(crate) fn all_finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|a| a.is_finite())
}
