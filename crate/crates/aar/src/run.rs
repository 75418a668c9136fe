//! Field-agnostic solver dispatch with wall-clock limits and timing.

use std::fmt;
use std::time::{Duration, Instant};

use aar_core::solve::Monitor;
use aar_core::{
    aar_solve_monitored, bicgstab_solve_monitored, cg_solve_monitored, gmres_solve_monitored,
    richardson_solve_monitored, AarOptions, CsrMatrix, KrylovOptions, Preconditioner, Scalar, SolveReport,
    SolveStatus, C64,
};
use clap::ValueEnum;

use crate::error::Result;
use crate::mtx::{MtxMatrix, MtxVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum SolverKind {
    Aar,
    Gmres,
    Bicgstab,
    Cg,
    Richardson,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Aar => "aar",
            SolverKind::Gmres => "gmres",
            SolverKind::Bicgstab => "bicgstab",
            SolverKind::Cg => "cg",
            SolverKind::Richardson => "richardson",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum PrecondKind {
    None,
    Jacobi,
    Ilu0,
    #[value(name = "block-ilu0")]
    BlockIlu0,
}

impl PrecondKind {
    pub fn name(self) -> &'static str {
        match self {
            PrecondKind::None => "none",
            PrecondKind::Jacobi => "jacobi",
            PrecondKind::Ilu0 => "ilu0",
            PrecondKind::BlockIlu0 => "block-ilu0",
        }
    }
}

impl fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialGuess {
    Zeros,
    Ones,
}

impl InitialGuess {
    fn vector<T: Scalar>(self, n: usize) -> Vec<T> {
        match self {
            InitialGuess::Zeros => vec![T::zero(); n],
            InitialGuess::Ones => vec![T::one(); n],
        }
    }
}

/// Everything needed to run one solver on one system.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub solver: SolverKind,
    pub precond: PrecondKind,
    /// Block count for `block-ilu0`.
    pub blocks: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub omega: f64,
    pub beta: f64,
    pub m: usize,
    /// AAR extrapolation period; also the check interval of `richardson`.
    pub p: usize,
    pub restart: usize,
    pub rcond: f64,
    pub time_limit: Option<Duration>,
    /// Count preconditioner construction in the wall time.
    pub include_setup: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::Aar,
            precond: PrecondKind::Ilu0,
            blocks: 4,
            tol: 1e-6,
            max_iter: 100_000,
            omega: 0.6,
            beta: 0.6,
            m: 9,
            p: 8,
            restart: 30,
            rcond: 1e-14,
            time_limit: None,
            include_setup: false,
        }
    }
}

/// Stops a solve once a wall-clock budget is spent.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    start: Instant,
    limit: Option<Duration>,
}

impl Deadline {
    pub fn new(limit: Option<Duration>) -> Self {
        Self { start: Instant::now(), limit }
    }
}

impl<T> Monitor<T> for Deadline {
    fn interrupted(&mut self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() >= l)
    }
}

pub fn build_preconditioner<T: Scalar>(a: &CsrMatrix<T>, kind: PrecondKind, blocks: usize) -> Result<Preconditioner<T>> {
    Ok(match kind {
        PrecondKind::None => Preconditioner::identity(a.nrows()),
        PrecondKind::Jacobi => Preconditioner::jacobi(a)?,
        PrecondKind::Ilu0 => Preconditioner::ilu0(a)?,
        PrecondKind::BlockIlu0 => Preconditioner::block_jacobi_ilu0(a, blocks.min(a.nrows()).max(1))?,
    })
}

/// A finished run with its timing.
#[derive(Debug, Clone)]
pub struct Timed<T> {
    pub report: SolveReport<T>,
    pub seconds: f64,
}

/// Builds the preconditioner and runs the configured solver. The clock
/// (and the time limit) starts after preconditioner construction unless
/// `include_setup` is set.
pub fn run_solver<T: Scalar>(a: &CsrMatrix<T>, b: &[T], x0: &[T], cfg: &SolverConfig) -> Result<Timed<T>> {
    let setup_start = Instant::now();
    let precond = build_preconditioner(a, cfg.precond, cfg.blocks)?;
    let mut deadline = Deadline::new(cfg.time_limit);
    if cfg.include_setup {
        deadline.start = setup_start;
    }
    let kopts = KrylovOptions { tol: cfg.tol, max_iter: cfg.max_iter, restart: cfg.restart };
    let report = match cfg.solver {
        SolverKind::Aar => {
            let opts = AarOptions {
                omega: T::from_real(cfg.omega),
                beta: T::from_real(cfg.beta),
                m: cfg.m,
                p: cfg.p,
                tol: cfg.tol,
                max_iter: cfg.max_iter,
                rcond: cfg.rcond,
            };
            aar_solve_monitored(a, b, x0, &precond, &opts, &mut deadline)?
        }
        SolverKind::Gmres => gmres_solve_monitored(a, b, x0, &precond, &kopts, &mut deadline)?,
        SolverKind::Bicgstab => bicgstab_solve_monitored(a, b, x0, &precond, &kopts, &mut deadline)?,
        SolverKind::Cg => cg_solve_monitored(a, b, x0, &precond, &kopts, &mut deadline)?,
        SolverKind::Richardson => richardson_solve_monitored(
            a,
            b,
            x0,
            &precond,
            T::from_real(cfg.omega),
            cfg.tol,
            cfg.max_iter,
            cfg.p,
            &mut deadline,
        )?,
    };
    Ok(Timed { report, seconds: deadline.start.elapsed().as_secs_f64() })
}

/// A system whose field is decided by its input files.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearSystem {
    Real { a: CsrMatrix<f64>, b: Vec<f64> },
    Complex { a: CsrMatrix<C64>, b: Vec<C64> },
}

impl LinearSystem {
    /// Pairs a matrix with a right-hand side, defaulting to `b = A·ones`
    /// so that the exact solution is known. Mixed fields promote to complex.
    pub fn new(matrix: MtxMatrix, rhs: Option<MtxVector>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(aar_core::Error::NotSquare { nrows: matrix.nrows(), ncols: matrix.ncols() }.into());
        }
        if let Some(r) = &rhs {
            if r.len() != matrix.nrows() {
                return Err(aar_core::Error::DimensionMismatch { expected: matrix.nrows(), found: r.len() }.into());
            }
        }
        Ok(match (matrix, rhs) {
            (MtxMatrix::Real(a), None) => {
                let b = a.spmv(&vec![1.0; a.ncols()])?;
                LinearSystem::Real { a, b }
            }
            (MtxMatrix::Real(a), Some(MtxVector::Real(b))) => LinearSystem::Real { a, b },
            (MtxMatrix::Complex(a), None) => {
                let b = a.spmv(&vec![C64::new(1.0, 0.0); a.ncols()])?;
                LinearSystem::Complex { a, b }
            }
            (m, Some(r)) => LinearSystem::Complex { a: m.into_complex(), b: r.into_complex() },
        })
    }

    pub fn len(&self) -> usize {
        match self {
            LinearSystem::Real { b, .. } => b.len(),
            LinearSystem::Complex { b, .. } => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solve(&self, x0: InitialGuess, cfg: &SolverConfig) -> Result<Outcome> {
        let n = self.len();
        Ok(match self {
            LinearSystem::Real { a, b } => {
                let t = run_solver(a, b, &x0.vector(n), cfg)?;
                Outcome::from_timed(t, MtxVector::Real)
            }
            LinearSystem::Complex { a, b } => {
                let t = run_solver(a, b, &x0.vector(n), cfg)?;
                Outcome::from_timed(t, MtxVector::Complex)
            }
        })
    }
}

/// Field-erased result of [`LinearSystem::solve`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub residual_trace: Vec<(usize, f64)>,
    pub seconds: f64,
    pub solution: MtxVector,
}

impl Outcome {
    fn from_timed<T>(t: Timed<T>, wrap: impl FnOnce(Vec<T>) -> MtxVector) -> Self {
        let final_relative_residual = t.report.final_relative_residual();
        Self {
            status: t.report.status,
            iterations: t.report.iterations,
            final_relative_residual,
            residual_trace: t.report.residual_trace,
            seconds: t.seconds,
            solution: wrap(t.report.x),
        }
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

