#![allow(dead_code)]

use aar_core::{CsrMatrix, Scalar, C64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sparse matrix with roughly `density` off-diagonal fill and a
/// diagonal that dominates each row by `margin`.
pub fn random_diag_dominant(n: usize, density: f64, margin: f64, seed: u64) -> CsrMatrix<f64> {
    let mut r = rng(seed);
    let mut e = Vec::new();
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j && r.gen::<f64>() < density {
                let v = r.gen_range(-1.0..1.0);
                row_sum += f64::abs(v);
                e.push((i, j, v));
            }
        }
        let sign = if r.gen::<bool>() { 1.0 } else { -1.0 };
        e.push((i, i, sign * (row_sum + margin + r.gen::<f64>())));
    }
    CsrMatrix::from_triplets(n, n, &e).unwrap()
}

/// `I + ε R` with dense random `R`: well conditioned and nonsymmetric.
pub fn random_well_conditioned(n: usize, eps: f64, seed: u64) -> CsrMatrix<f64> {
    let mut r = rng(seed);
    let mut e = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = eps * r.gen_range(-1.0..1.0) / (n as f64).sqrt();
            e.push((i, j, if i == j { 1.0 + v } else { v }));
        }
    }
    CsrMatrix::from_triplets(n, n, &e).unwrap()
}

pub fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

pub fn random_cvec(n: usize, seed: u64) -> Vec<C64> {
    let mut r = rng(seed);
    (0..n).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
}

pub fn dense_real(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        d[(i, j)] += v;
    }
    d
}

pub fn dense_complex(a: &CsrMatrix<C64>) -> DMatrix<C64> {
    let mut d = DMatrix::from_element(a.nrows(), a.ncols(), C64::new(0.0, 0.0));
    for (i, j, v) in a.triplets() {
        d[(i, j)] += v;
    }
    d
}

pub fn dense_solve(a: &CsrMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let x = dense_real(a).lu().solve(&DVector::from_column_slice(b)).expect("nonsingular");
    x.iter().copied().collect()
}

pub fn dense_solve_complex(a: &CsrMatrix<C64>, b: &[C64]) -> Vec<C64> {
    let x = dense_complex(a).lu().solve(&DVector::from_column_slice(b)).expect("nonsingular");
    x.iter().copied().collect()
}

pub fn norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|z| z.abs_sq()).sum::<f64>().sqrt()
}

pub fn rel_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    let d: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    norm(&d) / norm(b).max(f64::MIN_POSITIVE)
}

/// Subtracts the arithmetic mean (solutions of periodic Poisson problems are
/// defined up to a constant).
pub fn mean_shift(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}
