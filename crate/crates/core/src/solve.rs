//! Solver results and the observation hooks shared by every solver.

use alloc::vec::Vec;
use core::fmt;

use crate::aar::AndersonHistory;

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterReached,
    /// The monitor asked the solver to stop (wall-clock limit).
    Interrupted,
    Breakdown(&'static str),
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Converged => f.write_str("converged"),
            SolveStatus::MaxIterReached => f.write_str("max-iter"),
            SolveStatus::Interrupted => f.write_str("interrupted"),
            SolveStatus::Breakdown(why) => write!(f, "breakdown ({why})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub x: Vec<T>,
    /// `(iteration, ‖b − A x‖ / ‖b‖)` at every convergence check.
    pub residual_trace: Vec<(usize, f64)>,
    pub iterations: usize,
    /// Anderson extrapolations performed (zero for the Krylov solvers).
    pub extrapolations: usize,
    pub status: SolveStatus,
    /// Residual-norm evaluations used for convergence monitoring.
    pub residual_norm_evals: usize,
    /// Inner-product reductions of any kind (each would be one global
    /// all-reduce in a distributed run).
    pub reductions: usize,
}

impl<T> SolveReport<T> {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Relative residual of the last check, `NaN` if none was made.
    pub fn final_relative_residual(&self) -> f64 {
        self.residual_trace.last().map_or(f64::NAN, |&(_, r)| r)
    }
}

/// Everything known at an Anderson extrapolation step, after the
/// coefficients are computed and before the iterate is updated.
pub struct AndersonStep<'a, T> {
    pub iteration: usize,
    pub history: &'a AndersonHistory<T>,
    /// Current preconditioned residual `f_k`.
    pub f: &'a [T],
    /// Coefficients in the history's chronological column order.
    pub gamma: &'a [T],
    pub rcond: f64,
}

/// Observer hooks. Every method has a no-op default.
pub trait Monitor<T> {
    /// Called with each new iterate `x_k`, `k ≥ 1`.
    fn on_iterate(&mut self, _k: usize, _x: &[T]) {}
    fn on_anderson(&mut self, _step: &AndersonStep<'_, T>) {}
    /// Polled once per iteration; returning `true` stops the solve.
    fn interrupted(&mut self) -> bool {
        false
    }
}

/// The do-nothing monitor.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoMonitor;

impl<T> Monitor<T> for NoMonitor {}

/// Records every iterate; handy for comparing solvers step by step.
#[derive(Debug, Default, Clone)]
pub struct IterateRecorder<T> {
    pub iterates: Vec<(usize, Vec<T>)>,
}

impl<T: Clone> Monitor<T> for IterateRecorder<T> {
    fn on_iterate(&mut self, k: usize, x: &[T]) {
        self.iterates.push((k, x.to_vec()));
    }
}
