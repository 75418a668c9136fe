//! Left preconditioners `v ↦ M⁻¹v`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{check_len, CsrMatrix};

/// An immutable, built preconditioner.
#[derive(Debug, Clone, PartialEq)]
pub enum Preconditioner<T> {
    /// `M = I`.
    Identity { n: usize },
    /// `M = diag(A)`; stores the diagonal itself and divides on apply.
    Jacobi { diag: Vec<T> },
    Ilu0(Ilu0<T>),
    BlockJacobiIlu0(BlockJacobiIlu0<T>),
}

impl<T: Scalar> Preconditioner<T> {
    pub fn identity(n: usize) -> Self {
        Preconditioner::Identity { n }
    }

    /// Jacobi preconditioner. Every diagonal entry must be stored, nonzero
    /// and finite.
    pub fn jacobi(a: &CsrMatrix<T>) -> Result<Self> {
        require_square(a)?;
        let mut diag = Vec::with_capacity(a.nrows());
        for (row, d) in a.diagonal().into_iter().enumerate() {
            let d = d.ok_or(Error::MissingDiagonal { row })?;
            if d.is_zero() || !d.is_finite() {
                return Err(Error::ZeroDiagonal { row });
            }
            diag.push(d);
        }
        Ok(Preconditioner::Jacobi { diag })
    }

    pub fn ilu0(a: &CsrMatrix<T>) -> Result<Self> {
        Ok(Preconditioner::Ilu0(Ilu0::new(a)?))
    }

    pub fn block_jacobi_ilu0(a: &CsrMatrix<T>, nblocks: usize) -> Result<Self> {
        Ok(Preconditioner::BlockJacobiIlu0(BlockJacobiIlu0::new(a, nblocks)?))
    }

    /// Dimension of the vectors this preconditioner acts on.
    pub fn dim(&self) -> usize {
        match self {
            Preconditioner::Identity { n } => *n,
            Preconditioner::Jacobi { diag } => diag.len(),
            Preconditioner::Ilu0(f) => f.dim(),
            Preconditioner::BlockJacobiIlu0(f) => f.dim(),
        }
    }

    /// Short lowercase name, as used on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Preconditioner::Identity { .. } => "none",
            Preconditioner::Jacobi { .. } => "jacobi",
            Preconditioner::Ilu0(_) => "ilu0",
            Preconditioner::BlockJacobiIlu0(_) => "block-ilu0",
        }
    }

    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        check_len(self.dim(), v.len())?;
        let mut out = vec![T::zero(); v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// `out = M⁻¹ v`. Panics on length mismatch.
    pub fn apply_into(&self, v: &[T], out: &mut [T]) {
        assert_eq!(v.len(), self.dim(), "preconditioner: input has the wrong length");
        assert_eq!(out.len(), v.len(), "preconditioner: output has the wrong length");
        match self {
            Preconditioner::Identity { .. } => out.copy_from_slice(v),
            Preconditioner::Jacobi { diag } => {
                for ((o, &vi), &d) in out.iter_mut().zip(v).zip(diag) {
                    *o = vi / d;
                }
            }
            Preconditioner::Ilu0(f) => f.solve_into(v, out),
            Preconditioner::BlockJacobiIlu0(f) => f.solve_into(v, out),
        }
    }
}

fn require_square<T: Scalar>(a: &CsrMatrix<T>) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare { nrows: a.nrows(), ncols: a.ncols() })
    }
}

/// No-fill incomplete LU factors stored on the pattern of `A`.
///
/// The strictly lower part holds `L` (unit diagonal implied), the rest holds
/// `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ilu0<T> {
    lu: CsrMatrix<T>,
    diag_pos: Vec<usize>,
}

impl<T: Scalar> Ilu0<T> {
    /// IKJ row elimination restricted to the stored pattern. No pivoting and
    /// no diagonal shift: a zero pivot is an error.
    pub fn new(a: &CsrMatrix<T>) -> Result<Self> {
        require_square(a)?;
        let n = a.nrows();
        let mut values = a.values().to_vec();
        let offsets = a.row_offsets();
        let cols = a.col_indices();

        let mut diag_pos = Vec::with_capacity(n);
        for i in 0..n {
            let (rc, _) = a.row(i);
            let k = rc.binary_search(&i).map_err(|_| Error::MissingDiagonal { row: i })?;
            diag_pos.push(offsets[i] + k);
        }

        // position of column j in the current row, or usize::MAX
        let mut marker = vec![usize::MAX; n];
        for i in 0..n {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            for p in lo..hi {
                marker[cols[p]] = p;
            }
            for p in lo..diag_pos[i] {
                let k = cols[p];
                let pivot = values[diag_pos[k]];
                let lik = values[p] / pivot;
                values[p] = lik;
                for q in diag_pos[k] + 1..offsets[k + 1] {
                    let slot = marker[cols[q]];
                    if slot != usize::MAX {
                        let ukj = values[q];
                        values[slot] -= lik * ukj;
                    }
                }
            }
            for p in lo..hi {
                marker[cols[p]] = usize::MAX;
            }
            let pivot = values[diag_pos[i]];
            if pivot.is_zero() || !pivot.is_finite() {
                return Err(Error::ZeroPivot { row: i });
            }
        }

        let lu = CsrMatrix::from_raw_parts(n, n, offsets.to_vec(), cols.to_vec(), values)?;
        Ok(Self { lu, diag_pos })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// Unit lower-triangular factor with its diagonal stored explicitly.
    pub fn l_factor(&self) -> CsrMatrix<T> {
        let mut e = Vec::new();
        for (i, j, v) in self.lu.triplets() {
            if j < i {
                e.push((i, j, v));
            }
        }
        for i in 0..self.dim() {
            e.push((i, i, T::one()));
        }
        CsrMatrix::from_triplets(self.dim(), self.dim(), &e).expect("factor indices are in range")
    }

    /// Upper-triangular factor including the pivots.
    pub fn u_factor(&self) -> CsrMatrix<T> {
        let e: Vec<_> = self.lu.triplets().filter(|&(i, j, _)| j >= i).collect();
        CsrMatrix::from_triplets(self.dim(), self.dim(), &e).expect("factor indices are in range")
    }

    /// Forward solve with `L`, then backward solve with `U`.
    pub fn solve_into(&self, v: &[T], out: &mut [T]) {
        let n = self.dim();
        let offsets = self.lu.row_offsets();
        let cols = self.lu.col_indices();
        let vals = self.lu.values();
        for i in 0..n {
            let mut acc = v[i];
            for p in offsets[i]..self.diag_pos[i] {
                acc -= vals[p] * out[cols[p]];
            }
            out[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = out[i];
            for p in self.diag_pos[i] + 1..offsets[i + 1] {
                acc -= vals[p] * out[cols[p]];
            }
            out[i] = acc / vals[self.diag_pos[i]];
        }
    }
}

/// Block-diagonal preconditioner with an independent ILU(0) per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockJacobiIlu0<T> {
    ranges: Vec<Range<usize>>,
    blocks: Vec<Ilu0<T>>,
}

impl<T: Scalar> BlockJacobiIlu0<T> {
    pub fn new(a: &CsrMatrix<T>, nblocks: usize) -> Result<Self> {
        require_square(a)?;
        let ranges = block_ranges(a.nrows(), nblocks)?;
        let blocks = ranges
            .iter()
            .enumerate()
            .map(|(block, r)| {
                Ilu0::new(&a.diagonal_block(r.clone()))
                    .map_err(|e| Error::BlockFactor { block, source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ranges, blocks })
    }

    pub fn dim(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn blocks(&self) -> &[Ilu0<T>] {
        &self.blocks
    }

    pub fn solve_into(&self, v: &[T], out: &mut [T]) {
        for (r, f) in self.ranges.iter().zip(&self.blocks) {
            f.solve_into(&v[r.clone()], &mut out[r.clone()]);
        }
    }
}

/// Splits `0..n` into `nblocks` contiguous ranges whose sizes differ by at
/// most one; the leading blocks take the remainder rows.
pub fn block_ranges(n: usize, nblocks: usize) -> Result<Vec<Range<usize>>> {
    if nblocks == 0 || nblocks > n {
        return Err(Error::InvalidBlockCount { nblocks, n });
    }
    let (base, extra) = (n / nblocks, n % nblocks);
    let mut ranges = Vec::with_capacity(nblocks);
    let mut start = 0;
    for b in 0..nblocks {
        let len = base + usize::from(b < extra);
        ranges.push(start..start + len);
        start += len;
    }
    Ok(ranges)
}
