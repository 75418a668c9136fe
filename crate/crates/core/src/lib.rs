//! Sparse iterative solvers built around the preconditioned Alternating
//! Anderson-Richardson (AAR) method.
//!
//! AAR runs a preconditioned Richardson iteration and replaces every `p`-th
//! update with an Anderson extrapolation over the last `m` iterate and
//! residual differences. The residual norm is only evaluated at those
//! extrapolation steps, so the bulk of the work is communication-free
//! Richardson sweeps.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is generic over
//! [`Scalar`], instantiated for `f64` and [`C64`]:
//!
//! - [`sparse`]: CSR storage, matrix-vector products and vector kernels.
//! - [`precond`]: Jacobi, ILU(0) and block-Jacobi/ILU(0) preconditioners.
//! - [`aar`]: the AAR solver, the Anderson coefficient solve and a plain
//!   Richardson reference solver.
//! - [`krylov`]: restarted GMRES, Bi-CGSTAB and CG baselines.
//! - [`problems`]: periodic sixth-order finite-difference Poisson and
//!   complex Helmholtz generators.
//!
//! File formats, timing and the command line live in the companion `aar`
//! crate.
#![no_std]

extern crate alloc;

pub mod aar;
pub mod dense;
pub mod error;
pub mod krylov;
pub mod precond;
pub mod problems;
pub mod scalar;
pub mod solve;
pub mod sparse;

pub use crate::aar::{
    aar_solve, aar_solve_monitored, anderson_gamma, richardson_solve, richardson_solve_monitored, AarOptions,
};
pub use crate::dense::{pseudoinverse, DenseMatrix};
pub use crate::error::{Error, Result};
pub use crate::krylov::{
    bicgstab_solve, bicgstab_solve_monitored, cg_solve, cg_solve_monitored, gmres_solve, gmres_solve_monitored,
    KrylovOptions,
};
pub use crate::precond::Preconditioner;
pub use crate::scalar::{Scalar, C64};
pub use crate::solve::{Monitor, NoMonitor, SolveReport, SolveStatus};
pub use crate::sparse::{dot, norm2, CsrMatrix};
