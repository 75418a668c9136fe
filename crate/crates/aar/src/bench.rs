//! Solver × preconditioner sweeps over a directory of Matrix Market files.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::error::{Error, Result};
use crate::mtx::{read_matrix_market_file, read_vector_file};
use crate::record::RunRecord;
use crate::run::{InitialGuess, LinearSystem, PrecondKind, SolverConfig, SolverKind};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "AAR_SOLVE_THREADS";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub solvers: Vec<SolverKind>,
    pub preconds: Vec<PrecondKind>,
    /// Shared settings; `solver` and `precond` are overridden per run.
    pub base: SolverConfig,
    pub x0: InitialGuess,
    pub threads: Option<usize>,
}

/// Matrix files in `dir`, sorted by name. Files named `<stem>_rhs.mtx` are
/// right-hand sides, not matrices.
pub fn discover_matrices(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::from(e).in_file(dir))? {
        let path = entry?.path();
        let is_mtx = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx"));
        let is_rhs = path.file_stem().and_then(|s| s.to_str()).is_some_and(|s| s.ends_with("_rhs"));
        if is_mtx && !is_rhs && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn rhs_path(matrix: &Path) -> PathBuf {
    let stem = matrix.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    matrix.with_file_name(format!("{stem}_rhs.mtx"))
}

/// Loads a matrix and its sidecar right-hand side if one exists.
pub fn load_system(matrix: &Path) -> Result<LinearSystem> {
    let a = read_matrix_market_file(matrix)?;
    let rhs = rhs_path(matrix);
    let b = if rhs.is_file() { Some(read_vector_file(&rhs)?) } else { None };
    LinearSystem::new(a, b).map_err(|e| e.in_file(matrix))
}

/// Worker count: available parallelism, capped by [`THREADS_ENV`] and by
/// the number of jobs.
pub fn worker_count(jobs: usize, requested: Option<usize>) -> usize {
    let env = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    let avail = thread::available_parallelism().map_or(1, |n| n.get());
    let mut n = requested.unwrap_or(avail);
    if let Some(cap) = env {
        n = n.min(cap);
    }
    n.clamp(1, jobs.max(1))
}

fn failed(name: &str, n: usize, solver: SolverKind, precond: PrecondKind) -> RunRecord {
    RunRecord {
        matrix_name: name.to_owned(),
        n,
        solver: solver.name().to_owned(),
        preconditioner: precond.name().to_owned(),
        converged: false,
        iterations: 0,
        final_relative_residual: f64::NAN,
        wall_time_seconds: 0.0,
    }
}

fn run_matrix(path: &Path, cfg: &BenchConfig, warn: &(dyn Fn(String) + Sync)) -> Vec<RunRecord> {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let system = match load_system(path) {
        Ok(s) => s,
        Err(e) => {
            warn(format!("skipping {}: {e}", path.display()));
            return cfg
                .solvers
                .iter()
                .flat_map(|&s| cfg.preconds.iter().map(move |&p| (s, p)))
                .map(|(s, p)| failed(&name, 0, s, p))
                .collect();
        }
    };
    let mut rows = Vec::new();
    for &solver in &cfg.solvers {
        for &precond in &cfg.preconds {
            let run_cfg = SolverConfig { solver, precond, ..cfg.base.clone() };
            let row = match system.solve(cfg.x0, &run_cfg) {
                Ok(out) => RunRecord {
                    matrix_name: name.clone(),
                    n: system.len(),
                    solver: solver.name().to_owned(),
                    preconditioner: precond.name().to_owned(),
                    converged: out.converged(),
                    iterations: out.iterations,
                    final_relative_residual: out.final_relative_residual,
                    wall_time_seconds: out.seconds,
                },
                Err(e) => {
                    warn(format!("{name} {solver}/{precond}: {e}"));
                    failed(&name, system.len(), solver, precond)
                }
            };
            rows.push(row);
        }
    }
    rows
}

/// Runs the sweep. Matrices are processed in parallel; rows come back
/// sorted by matrix name, then solver and preconditioner in the order
/// they were requested.
pub fn run_bench(matrices: &[PathBuf], cfg: &BenchConfig, warn: &(dyn Fn(String) + Sync)) -> Vec<RunRecord> {
    let next = AtomicUsize::new(0);
    let rows = Mutex::new(Vec::new());
    let workers = worker_count(matrices.len(), cfg.threads);
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = matrices.get(i) else { break };
                let done = run_matrix(path, cfg, warn);
                rows.lock().expect("a bench worker panicked").extend(done);
            });
        }
    });

    let rank = |r: &RunRecord| {
        let s = cfg.solvers.iter().position(|k| k.name() == r.solver);
        let p = cfg.preconds.iter().position(|k| k.name() == r.preconditioner);
        (s, p)
    };
    let mut rows = rows.into_inner().expect("a bench worker panicked");
    rows.sort_by(|a, b| a.matrix_name.cmp(&b.matrix_name).then_with(|| rank(a).cmp(&rank(b))));
    rows
}
