//! Preconditioned Alternating Anderson-Richardson.
//!
//! With `f_k = M⁻¹(b − A x_k)` the iteration is
//!
//! ```text
//! x_{k+1} = x_k + ω f_k                                  if (k+1) mod p ≠ 0
//! x_{k+1} = x_k + β f_k − (X_k + β F_k) γ_k              if (k+1) mod p = 0
//! γ_k     = pinv(F_kᴴ F_k) F_kᴴ f_k
//! ```
//!
//! where the columns of `X_k` and `F_k` are the last `min(m, k)` differences
//! of consecutive iterates and preconditioned residuals. The unpreconditioned
//! relative residual is evaluated only on extrapolation steps, fused with the
//! Gram matrix assembly into one reduction.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{hermitian_eigen, DenseMatrix};
use crate::error::{Error, Result};
use crate::precond::Preconditioner;
use crate::scalar::Scalar;
use crate::solve::{AndersonStep, Monitor, NoMonitor, SolveReport, SolveStatus};
use crate::sparse::{all_finite, axpy, check_len, norm2, CsrMatrix};

/// AAR parameters. The defaults are `ω = β = 0.6`, `m = 9`, `p = 8`,
/// `tol = 1e-6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AarOptions<T> {
    /// Richardson relaxation.
    pub omega: T,
    /// Anderson relaxation.
    pub beta: T,
    /// History length (number of difference columns kept).
    pub m: usize,
    /// Extrapolation period.
    pub p: usize,
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative eigenvalue cutoff of the Gram pseudoinverse.
    pub rcond: f64,
}

impl<T: Scalar> Default for AarOptions<T> {
    fn default() -> Self {
        Self {
            omega: T::from_real(0.6),
            beta: T::from_real(0.6),
            m: 9,
            p: 8,
            tol: 1e-6,
            max_iter: 100_000,
            rcond: 1e-14,
        }
    }
}

impl<T: Scalar> AarOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidOption("m must be at least 1"));
        }
        if self.p == 0 {
            return Err(Error::InvalidOption("p must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidOption("tol must be positive"));
        }
        if !(self.rcond > 0.0 && self.rcond < 1.0) {
            return Err(Error::InvalidOption("rcond must lie in (0, 1)"));
        }
        if !self.omega.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidOption("relaxation parameters must be finite"));
        }
        Ok(())
    }
}

/// Sliding window of iterate and residual differences, oldest first.
#[derive(Debug, Clone)]
pub struct AndersonHistory<T> {
    capacity: usize,
    dx: VecDeque<Vec<T>>,
    df: VecDeque<Vec<T>>,
}

impl<T: Scalar> AndersonHistory<T> {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, dx: VecDeque::with_capacity(capacity), df: VecDeque::with_capacity(capacity) }
    }

    pub fn len(&self) -> usize {
        self.dx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dx.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dx_columns(&self) -> impl Iterator<Item = &[T]> {
        self.dx.iter().map(Vec::as_slice)
    }

    pub fn df_columns(&self) -> impl Iterator<Item = &[T]> {
        self.df.iter().map(Vec::as_slice)
    }

    /// Appends `(x − x_prev, f − f_prev)`, evicting the oldest pair when
    /// full, and then overwrites `x_prev`/`f_prev` with `x`/`f`.
    pub fn push_difference(&mut self, x: &[T], x_prev: &mut [T], f: &[T], f_prev: &mut [T]) {
        let (mut dx, mut df) = if self.dx.len() == self.capacity {
            (self.dx.pop_front().expect("full"), self.df.pop_front().expect("full"))
        } else {
            (vec![T::zero(); x.len()], vec![T::zero(); x.len()])
        };
        for i in 0..x.len() {
            dx[i] = x[i] - x_prev[i];
            df[i] = f[i] - f_prev[i];
        }
        x_prev.copy_from_slice(x);
        f_prev.copy_from_slice(f);
        self.dx.push_back(dx);
        self.df.push_back(df);
    }
}

/// `G = FᴴF`, `g = Fᴴf` and optionally `‖r‖²`, accumulated together in
/// one pass over the rows.
struct GramSystem<T> {
    gram: DenseMatrix<T>,
    rhs: Vec<T>,
    extra_norm_sq: f64,
}

impl<T: Scalar> GramSystem<T> {
    fn assemble(columns: &[&[T]], f: &[T], extra: Option<&[T]>) -> Self {
        let m = columns.len();
        let mut gram = DenseMatrix::<T>::zeros(m, m);
        let mut rhs = vec![T::zero(); m];
        let mut extra_norm_sq = 0.0;
        for i in 0..f.len() {
            for a in 0..m {
                let ca = columns[a][i].conj();
                rhs[a] += ca * f[i];
                for b in a..m {
                    gram[(a, b)] += ca * columns[b][i];
                }
            }
            if let Some(r) = extra {
                extra_norm_sq += r[i].abs_sq();
            }
        }
        for a in 0..m {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)].conj();
            }
        }
        Self { gram, rhs, extra_norm_sq }
    }

    fn solve(&self, rcond: f64) -> Vec<T> {
        if self.rhs.is_empty() {
            return Vec::new();
        }
        hermitian_eigen(&self.gram).pinv_apply(&self.rhs, rcond)
    }
}

/// Anderson coefficients `γ = pinv(FᴴF) Fᴴ f`, i.e. the minimiser of
/// `‖f − Fγ‖₂` with eigenvalues of `FᴴF` below `rcond · λ_max` discarded.
pub fn anderson_gamma<T: Scalar>(df_columns: &[&[T]], f: &[T], rcond: f64) -> Result<Vec<T>> {
    for c in df_columns {
        check_len(f.len(), c.len())?;
    }
    Ok(GramSystem::assemble(df_columns, f, None).solve(rcond))
}

/// Quality measures of one Anderson projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionAudit {
    /// `‖f‖₂`
    pub f_norm: f64,
    /// `‖f − Fγ‖₂`
    pub projected_norm: f64,
    /// `‖Fᴴ(f − Fγ)‖₂`
    pub normal_residual: f64,
    /// Spectral norm of `F`.
    pub f_op_norm: f64,
    /// Spectral condition number of `FᴴF` (infinite when singular).
    pub gram_cond: f64,
}

impl ProjectionAudit {
    pub fn compute<T: Scalar>(df_columns: &[&[T]], f: &[T], gamma: &[T]) -> Self {
        let mut proj = f.to_vec();
        for (c, &g) in df_columns.iter().zip(gamma) {
            axpy(-g, c, &mut proj);
        }
        let normal: Vec<T> = df_columns
            .iter()
            .map(|c| {
                let mut acc = T::zero();
                for (&a, &b) in c.iter().zip(&proj) {
                    acc += a.conj() * b;
                }
                acc
            })
            .collect();
        let eig = hermitian_eigen(&GramSystem::assemble(df_columns, f, None).gram);
        let lmax = eig.values.iter().fold(0.0f64, |m, &l| m.max(l));
        let lmin = eig.values.iter().fold(f64::INFINITY, |m, &l| m.min(l));
        let gram_cond = if df_columns.is_empty() {
            1.0
        } else if lmin > 0.0 {
            lmax / lmin
        } else {
            f64::INFINITY
        };
        Self {
            f_norm: norm2(f),
            projected_norm: norm2(&proj),
            normal_residual: norm2(&normal),
            f_op_norm: libm::sqrt(lmax.max(0.0)),
            gram_cond,
        }
    }

    /// The projection never increases the residual (up to rounding).
    pub fn is_non_expansive(&self) -> bool {
        self.projected_norm <= self.f_norm * (1.0 + 1e-10)
    }

    /// Normal equations satisfied to `1e-8 ‖F‖ ‖f‖`, required only when
    /// `cond(FᴴF) ≤ 1/rcond`.
    pub fn normal_equations_hold(&self, rcond: f64) -> bool {
        self.gram_cond > 1.0 / rcond || self.normal_residual <= 1e-8 * self.f_op_norm * self.f_norm
    }

    pub fn holds(&self, rcond: f64) -> bool {
        self.is_non_expansive() && self.normal_equations_hold(rcond)
    }
}

fn check_system<T: Scalar>(a: &CsrMatrix<T>, b: &[T], x0: &[T], precond: &Preconditioner<T>) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::NotSquare { nrows: a.nrows(), ncols: a.ncols() });
    }
    let n = a.nrows();
    check_len(n, b.len())?;
    check_len(n, x0.len())?;
    check_len(n, precond.dim())?;
    Ok(n)
}

fn zero_rhs_report<T: Scalar>(n: usize, reductions: usize) -> SolveReport<T> {
    SolveReport {
        x: vec![T::zero(); n],
        residual_trace: vec![(0, 0.0)],
        iterations: 0,
        extrapolations: 0,
        status: SolveStatus::Converged,
        residual_norm_evals: 0,
        reductions,
    }
}

pub fn aar_solve<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &AarOptions<T>,
) -> Result<SolveReport<T>> {
    aar_solve_monitored(a, b, x0, precond, opts, &mut NoMonitor)
}

/// [`aar_solve`] with observation hooks.
///
/// On `MaxIterReached` the returned iterate is the one with the smallest
/// residual among all checks. On breakdown it is the last finite iterate.
pub fn aar_solve_monitored<T: Scalar, M: Monitor<T>>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    opts: &AarOptions<T>,
    monitor: &mut M,
) -> Result<SolveReport<T>> {
    let n = check_system(a, b, x0, precond)?;
    opts.validate()?;

    let b_norm = norm2(b);
    let mut reductions = 1;
    if b_norm == 0.0 {
        return Ok(zero_rhs_report(n, reductions));
    }

    let mut x = x0.to_vec();
    let mut r = vec![T::zero(); n];
    let mut f = vec![T::zero(); n];
    let mut x_prev = vec![T::zero(); n];
    let mut f_prev = vec![T::zero(); n];
    let mut history = AndersonHistory::new(opts.m);
    let mut trace = Vec::new();
    let mut best: Option<(f64, Vec<T>)> = None;
    let mut evals = 0;
    let mut extrapolations = 0;
    let mut k = 0;

    let status = loop {
        if k == opts.max_iter {
            break SolveStatus::MaxIterReached;
        }
        a.residual_into(b, &x, &mut r);
        precond.apply_into(&r, &mut f);
        if k == 0 {
            x_prev.copy_from_slice(&x);
            f_prev.copy_from_slice(&f);
        } else {
            history.push_difference(&x, &mut x_prev, &f, &mut f_prev);
        }

        if (k + 1) % opts.p == 0 {
            let columns: Vec<&[T]> = history.df_columns().collect();
            let system = GramSystem::assemble(&columns, &f, Some(&r));
            reductions += 1;
            evals += 1;
            let rel = libm::sqrt(system.extra_norm_sq) / b_norm;
            trace.push((k, rel));
            if !rel.is_finite() {
                break SolveStatus::Breakdown("divergence");
            }
            if best.as_ref().is_none_or(|(r0, _)| rel < *r0) {
                best = Some((rel, x.clone()));
            }
            if rel <= opts.tol {
                break SolveStatus::Converged;
            }

            let gamma = system.solve(opts.rcond);
            #[cfg(debug_assertions)]
            if all_finite(&f) && all_finite(&gamma) {
                let audit = ProjectionAudit::compute(&columns, &f, &gamma);
                debug_assert!(audit.holds(opts.rcond), "Anderson projection audit failed at k = {k}: {audit:?}");
            }
            monitor.on_anderson(&AndersonStep { iteration: k, history: &history, f: &f, gamma: &gamma, rcond: opts.rcond });

            let beta = opts.beta;
            axpy(beta, &f, &mut x);
            for ((dx, df), &g) in history.dx_columns().zip(history.df_columns()).zip(&gamma) {
                for i in 0..n {
                    x[i] -= g * (dx[i] + beta * df[i]);
                }
            }
            extrapolations += 1;
        } else {
            axpy(opts.omega, &f, &mut x);
        }
        k += 1;

        if !all_finite(&x) {
            x.copy_from_slice(&x_prev);
            k -= 1;
            break SolveStatus::Breakdown("divergence");
        }
        monitor.on_iterate(k, &x);
        if monitor.interrupted() {
            break SolveStatus::Interrupted;
        }
    };

    let mut status = status;
    if matches!(status, SolveStatus::MaxIterReached | SolveStatus::Interrupted) {
        a.residual_into(b, &x, &mut r);
        let rel = norm2(&r) / b_norm;
        reductions += 1;
        evals += 1;
        trace.push((k, rel));
        if rel <= opts.tol {
            status = SolveStatus::Converged;
        } else if let Some((r0, xb)) = best {
            if r0 < rel || !rel.is_finite() {
                x = xb;
            }
        }
    }

    Ok(SolveReport {
        x,
        residual_trace: trace,
        iterations: k,
        extrapolations,
        status,
        residual_norm_evals: evals,
        reductions,
    })
}

/// Plain preconditioned Richardson, `x_{k+1} = x_k + ω M⁻¹(b − A x_k)`,
/// checking the residual on iterations with `(k+1) mod check_every = 0`.
/// It is the `p → ∞` limit of [`aar_solve`] and bit-identical to it there.
#[allow(clippy::too_many_arguments)]
pub fn richardson_solve<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    omega: T,
    tol: f64,
    max_iter: usize,
    check_every: usize,
) -> Result<SolveReport<T>> {
    richardson_solve_monitored(a, b, x0, precond, omega, tol, max_iter, check_every, &mut NoMonitor)
}

#[allow(clippy::too_many_arguments)]
pub fn richardson_solve_monitored<T: Scalar, M: Monitor<T>>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: &[T],
    precond: &Preconditioner<T>,
    omega: T,
    tol: f64,
    max_iter: usize,
    check_every: usize,
    monitor: &mut M,
) -> Result<SolveReport<T>> {
    let n = check_system(a, b, x0, precond)?;
    if check_every == 0 {
        return Err(Error::InvalidOption("check_every must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidOption("tol must be positive"));
    }

    let b_norm = norm2(b);
    let mut reductions = 1;
    if b_norm == 0.0 {
        return Ok(zero_rhs_report(n, reductions));
    }

    let mut x = x0.to_vec();
    let mut last = x.clone();
    let mut r = vec![T::zero(); n];
    let mut f = vec![T::zero(); n];
    let mut trace = Vec::new();
    let mut evals = 0;
    let mut k = 0;
    let mut status = loop {
        if k == max_iter {
            break SolveStatus::MaxIterReached;
        }
        a.residual_into(b, &x, &mut r);
        if (k + 1) % check_every == 0 {
            let rel = norm2(&r) / b_norm;
            evals += 1;
            reductions += 1;
            trace.push((k, rel));
            if !rel.is_finite() {
                break SolveStatus::Breakdown("divergence");
            }
            if rel <= tol {
                break SolveStatus::Converged;
            }
        }
        precond.apply_into(&r, &mut f);
        last.copy_from_slice(&x);
        axpy(omega, &f, &mut x);
        k += 1;
        if !all_finite(&x) {
            x.copy_from_slice(&last);
            k -= 1;
            break SolveStatus::Breakdown("divergence");
        }
        monitor.on_iterate(k, &x);
        if monitor.interrupted() {
            break SolveStatus::Interrupted;
        }
    };

    if matches!(status, SolveStatus::MaxIterReached | SolveStatus::Interrupted) {
        a.residual_into(b, &x, &mut r);
        let rel = norm2(&r) / b_norm;
        evals += 1;
        reductions += 1;
        trace.push((k, rel));
        if rel <= tol {
            status = SolveStatus::Converged;
        }
    }

    Ok(SolveReport { x, residual_trace: trace, iterations: k, extrapolations: 0, status, residual_norm_evals: evals, reductions })
}
