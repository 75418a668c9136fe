//! Krylov baselines: restarted GMRES, Bi-CGSTAB and CG.
//!
//! All three stop on the unpreconditioned relative residual
//! `‖b − A x‖ / ‖b‖`, so their results are directly comparable with AAR.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::precond::Preconditioner;
use crate::scalar::Scalar;
use crate::solve::{Monitor, NoMonitor, SolveReport, SolveStatus};
use crate::sparse::{all_finite, axpy, check_len, dot_unchecked, norm2, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Arnoldi cycle length (GMRES only).
    pub restart: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 100_000, restart: 30 }
    }
}

impl KrylovOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restart == 0 {
            return Err(Error::InvalidOption("restart must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidOption("tol must be positive"));
        }
        Ok(())
    }
}

/// Scalar magnitude below which Bi-CGSTAB and CG declare breakdown.
pub const BREAKDOWN_THRESHOLD: f64 = 1e-30;

fn setup<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &KrylovOptions,
) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::NotSquare { nrows: a.nrows(), ncols: a.ncols() });
    }
    let n = a.nrows();
    check_len(n, b.len())?;
    check_len(n, x0.len())?;
    check_len(n, precond.dim())?;
    opts.validate()?;
    Ok(n)
}

/// Bookkeeping shared by the Krylov loops.
struct Tally {
    b_norm: f64,
    trace: Vec<(usize, f64)>,
    evals: usize,
    reductions: usize,
}

impl Tally {
    fn new(b_norm: f64) -> Self {
        Self { b_norm, trace: Vec::new(), evals: 0, reductions: 1 }
    }

    fn record(&mut self, k: usize, rel: f64) {
        self.evals += 1;
        self.trace.push((k, rel));
    }

    fn true_residual<T: Scalar>(&mut self, a: &CsrMatrix<T>, b: &[T], x: &[T], r: &mut [T], k: usize) -> f64 {
        a.residual_into(b, x, r);
        self.reductions += 1;
        let rel = norm2(r) / self.b_norm;
        self.record(k, rel);
        rel
    }

    fn finish<T>(self, x: Vec<T>, iterations: usize, status: SolveStatus) -> SolveReport<T> {
        SolveReport {
            x,
            residual_trace: self.trace,
            iterations,
            extrapolations: 0,
            status,
            residual_norm_evals: self.evals,
            reductions: self.reductions,
        }
    }
}

fn zero_solution<T: Scalar>(n: usize) -> SolveReport<T> {
    SolveReport {
        x: vec![T::zero(); n],
        residual_trace: vec![(0, 0.0)],
        iterations: 0,
        extrapolations: 0,
        status: SolveStatus::Converged,
        residual_norm_evals: 0,
        reductions: 1,
    }
}

/// Givens rotation `[c s; −s̄ c]` mapping `(a, b)` to `(ρ, 0)`, `c` real.
fn givens<T: Scalar>(a: T, b: T) -> (f64, T) {
    let (na, nb) = (a.abs(), b.abs());
    if nb == 0.0 {
        return (1.0, T::zero());
    }
    if na == 0.0 {
        return (0.0, T::one());
    }
    let nu = libm::hypot(na, nb);
    let phase = a.scale(1.0 / na);
    (na / nu, (phase * b.conj()).scale(1.0 / nu))
}

#[inline]
fn apply_givens<T: Scalar>(c: f64, s: T, x: &mut T, y: &mut T) {
    let (a, b) = (*x, *y);
    *x = a.scale(c) + s * b;
    *y = -(s.conj() * a) + b.scale(c);
}

pub fn gmres_solve<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &KrylovOptions,
) -> Result<SolveReport<T>> {
    gmres_solve_monitored(a, b, x0, precond, opts, &mut NoMonitor)
}

/// Left-preconditioned restarted GMRES: Arnoldi with modified Gram-Schmidt
/// on `M⁻¹A` and a Givens-rotation least-squares update.
///
/// Within a cycle the trace records the least-squares residual estimate
/// rescaled to unpreconditioned units (exact for `M = I`); cycle ends and
/// termination record the true residual.
pub fn gmres_solve_monitored<T: Scalar, M: Monitor<T>>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &KrylovOptions,
    monitor: &mut M,
) -> Result<SolveReport<T>> {
    let n = setup(a, b, x0, precond, opts)?;
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(zero_solution(n));
    }
    let mut tally = Tally::new(b_norm);
    let restart = opts.restart.min(n.max(1));

    let mut x = x0.to_vec();
    let mut r = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(restart + 1);
    // Hessenberg columns, each of length restart + 1
    let mut h: Vec<Vec<T>> = vec![vec![T::zero(); restart + 1]; restart];
    let mut cs = vec![0.0; restart];
    let mut sn = vec![T::zero(); restart];
    let mut g = vec![T::zero(); restart + 1];
    let mut iters = 0;
    let mut stop: Option<SolveStatus> = None;

    let status = loop {
        let rel = tally.true_residual(a, b, &x, &mut r, iters);
        if !rel.is_finite() {
            break SolveStatus::Breakdown("non-finite residual");
        }
        if rel <= opts.tol {
            break SolveStatus::Converged;
        }
        if let Some(s) = stop {
            break s;
        }
        if iters >= opts.max_iter {
            break SolveStatus::MaxIterReached;
        }

        let mut z = vec![T::zero(); n];
        precond.apply_into(&r, &mut z);
        let beta = norm2(&z);
        tally.reductions += 1;
        if beta == 0.0 || !beta.is_finite() {
            break SolveStatus::Breakdown("preconditioned residual vanished");
        }
        let true_norm = rel * b_norm;
        let to_rel = true_norm / beta / b_norm;
        let target = beta * opts.tol * b_norm / true_norm;

        basis.clear();
        for v in z.iter_mut() {
            *v = v.scale(1.0 / beta);
        }
        basis.push(z);
        g.iter_mut().for_each(|v| *v = T::zero());
        g[0] = T::from_real(beta);

        let mut size = 0;
        for j in 0..restart {
            if iters >= opts.max_iter {
                break;
            }
            a.spmv_into(&basis[j], &mut r);
            precond.apply_into(&r, &mut w);
            let col = &mut h[j];
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot_unchecked(vi, &w);
                col[i] = hij;
                axpy(-hij, vi, &mut w);
            }
            let hnext = norm2(&w);
            tally.reductions += j + 2;
            col[j + 1] = T::from_real(hnext);
            let col_norm = norm2(&col[..j + 2]);

            for i in 0..j {
                let (mut hi, mut hi1) = (col[i], col[i + 1]);
                apply_givens(cs[i], sn[i], &mut hi, &mut hi1);
                col[i] = hi;
                col[i + 1] = hi1;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            cs[j] = c;
            sn[j] = s;
            let (mut hj, mut hj1) = (col[j], col[j + 1]);
            apply_givens(c, s, &mut hj, &mut hj1);
            col[j] = hj;
            col[j + 1] = T::zero();
            let (mut gj, mut gj1) = (g[j], g[j + 1]);
            apply_givens(c, s, &mut gj, &mut gj1);
            g[j] = gj;
            g[j + 1] = gj1;

            iters += 1;
            size = j + 1;
            let est = g[j + 1].abs();
            tally.record(iters, est * to_rel);

            if !hnext.is_finite() || !est.is_finite() {
                stop = Some(SolveStatus::Breakdown("non-finite Arnoldi vector"));
                break;
            }
            if hnext <= f64::EPSILON * col_norm || est <= target {
                break;
            }
            if monitor.interrupted() {
                stop = Some(SolveStatus::Interrupted);
                break;
            }
            if j + 1 < restart {
                let mut next = w.clone();
                for v in next.iter_mut() {
                    *v = v.scale(1.0 / hnext);
                }
                basis.push(next);
            }
        }

        // back substitution on the triangularised Hessenberg block
        let mut y = vec![T::zero(); size];
        for i in (0..size).rev() {
            let mut acc = g[i];
            for k in i + 1..size {
                acc -= h[k][i] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        let before = x.clone();
        for (vi, &yi) in basis.iter().zip(&y) {
            axpy(yi, vi, &mut x);
        }
        if !all_finite(&x) {
            x = before;
            stop = Some(SolveStatus::Breakdown("non-finite iterate"));
            break stop.unwrap();
        }
        monitor.on_iterate(iters, &x);
    };

    Ok(tally.finish(x, iters, status))
}

pub fn bicgstab_solve<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &KrylovOptions,
) -> Result<SolveReport<T>> {
    bicgstab_solve_monitored(a, b, x0, precond, opts, &mut NoMonitor)
}

/// Preconditioned Bi-CGSTAB (van der Vorst). The recurrence residual is
/// unpreconditioned; once it meets the tolerance the true residual is
/// recomputed, and a mismatch restarts the recurrence from it.
pub fn bicgstab_solve_monitored<T: Scalar, M: Monitor<T>>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &KrylovOptions,
    monitor: &mut M,
) -> Result<SolveReport<T>> {
    let n = setup(a, b, x0, precond, opts)?;
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(zero_solution(n));
    }
    let mut tally = Tally::new(b_norm);

    let mut x = x0.to_vec();
    let mut r = vec![T::zero(); n];
    let mut rhat = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let mut phat = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut shat = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let mut k = 0;

    let mut rel = tally.true_residual(a, b, &x, &mut r, 0);
    let status = 'outer: loop {
        if !rel.is_finite() {
            break SolveStatus::Breakdown("non-finite residual");
        }
        if rel <= opts.tol {
            break SolveStatus::Converged;
        }
        if k >= opts.max_iter {
            break SolveStatus::MaxIterReached;
        }

        // (re)start the recurrence from the current residual
        rhat.copy_from_slice(&r);
        let rhat_norm = norm2(&rhat);
        let mut rho_prev = T::one();
        let mut alpha = T::one();
        let mut omega = T::one();
        v.iter_mut().for_each(|e| *e = T::zero());
        p.iter_mut().for_each(|e| *e = T::zero());

        loop {
            if k >= opts.max_iter {
                rel = tally.true_residual(a, b, &x, &mut r, k);
                if rel <= opts.tol {
                    break 'outer SolveStatus::Converged;
                }
                break 'outer SolveStatus::MaxIterReached;
            }
            let rho = dot_unchecked(&rhat, &r);
            tally.reductions += 1;
            if rho.abs() < BREAKDOWN_THRESHOLD * rhat_norm * norm2(&r) {
                tally.true_residual(a, b, &x, &mut r, k);
                break 'outer SolveStatus::Breakdown("bicgstab breakdown");
            }
            let beta = (rho / rho_prev) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            precond.apply_into(&p, &mut phat);
            a.spmv_into(&phat, &mut v);
            let rv = dot_unchecked(&rhat, &v);
            tally.reductions += 1;
            if rv.abs() == 0.0 {
                tally.true_residual(a, b, &x, &mut r, k);
                break 'outer SolveStatus::Breakdown("bicgstab breakdown");
            }
            alpha = rho / rv;
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            k += 1;

            let s_rel = norm2(&s) / b_norm;
            tally.reductions += 1;
            tally.record(k, s_rel);
            if s_rel <= opts.tol {
                axpy(alpha, &phat, &mut x);
                rel = tally.true_residual(a, b, &x, &mut r, k);
                continue 'outer;
            }

            precond.apply_into(&s, &mut shat);
            a.spmv_into(&shat, &mut t);
            let tt = norm2(&t);
            let ts = dot_unchecked(&t, &s);
            tally.reductions += 2;
            if tt == 0.0 || ts.abs() < BREAKDOWN_THRESHOLD * tt * norm2(&s) {
                axpy(alpha, &phat, &mut x);
                tally.true_residual(a, b, &x, &mut r, k);
                break 'outer SolveStatus::Breakdown("bicgstab breakdown");
            }
            omega = ts.scale(1.0 / (tt * tt));
            axpy(alpha, &phat, &mut x);
            axpy(omega, &shat, &mut x);
            for i in 0..n {
                r[i] = s[i] - omega * t[i];
            }
            rho_prev = rho;

            let r_rel = norm2(&r) / b_norm;
            tally.reductions += 1;
            tally.record(k, r_rel);
            if !r_rel.is_finite() || !all_finite(&x) {
                break 'outer SolveStatus::Breakdown("non-finite iterate");
            }
            monitor.on_iterate(k, &x);
            if r_rel <= opts.tol {
                rel = tally.true_residual(a, b, &x, &mut r, k);
                continue 'outer;
            }
            if monitor.interrupted() {
                tally.true_residual(a, b, &x, &mut r, k);
                break 'outer SolveStatus::Interrupted;
            }
        }
    };

    Ok(tally.finish(x, k, status))
}

pub fn cg_solve<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &KrylovOptions,
) -> Result<SolveReport<T>> {
    cg_solve_monitored(a, b, x0, precond, opts, &mut NoMonitor)
}

/// Preconditioned conjugate gradients. Hermitian positive (semi)definite
/// `A` and `M` are assumed; nonpositive curvature is a breakdown.
pub fn cg_solve_monitored<T: Scalar, M: Monitor<T>>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &KrylovOptions,
    monitor: &mut M,
) -> Result<SolveReport<T>> {
    let n = setup(a, b, x0, precond, opts)?;
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(zero_solution(n));
    }
    let mut tally = Tally::new(b_norm);

    let mut x = x0.to_vec();
    let mut r = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    let mut k = 0;

    let mut rel = tally.true_residual(a, b, &x, &mut r, 0);
    let status = 'outer: loop {
        if !rel.is_finite() {
            break SolveStatus::Breakdown("non-finite residual");
        }
        if rel <= opts.tol {
            break SolveStatus::Converged;
        }
        if k >= opts.max_iter {
            break SolveStatus::MaxIterReached;
        }

        precond.apply_into(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot_unchecked(&r, &z).re();
        tally.reductions += 1;

        loop {
            if k >= opts.max_iter {
                rel = tally.true_residual(a, b, &x, &mut r, k);
                if rel <= opts.tol {
                    break 'outer SolveStatus::Converged;
                }
                break 'outer SolveStatus::MaxIterReached;
            }
            a.spmv_into(&p, &mut q);
            let curvature = dot_unchecked(&p, &q).re();
            tally.reductions += 1;
            if !(curvature > 0.0) {
                tally.true_residual(a, b, &x, &mut r, k);
                if !curvature.is_finite() {
                    break 'outer SolveStatus::Breakdown("non-finite curvature");
                }
                break 'outer SolveStatus::Breakdown("indefinite");
            }
            let alpha = T::from_real(rz / curvature);
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &q, &mut r);
            k += 1;

            let r_rel = norm2(&r) / b_norm;
            tally.reductions += 1;
            tally.record(k, r_rel);
            if !r_rel.is_finite() || !all_finite(&x) {
                break 'outer SolveStatus::Breakdown("non-finite iterate");
            }
            monitor.on_iterate(k, &x);
            if r_rel <= opts.tol {
                rel = tally.true_residual(a, b, &x, &mut r, k);
                continue 'outer;
            }
            if monitor.interrupted() {
                tally.true_residual(a, b, &x, &mut r, k);
                break 'outer SolveStatus::Interrupted;
            }

            precond.apply_into(&r, &mut z);
            let rz_next = dot_unchecked(&r, &z).re();
            tally.reductions += 1;
            let beta = T::from_real(rz_next / rz);
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    };

    Ok(tally.finish(x, k, status))
}
