//! The `aar` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use aar_core::problems::{build_helmholtz_system, build_poisson_system, synthetic_density, GridSpec, MESH_COARSE};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{discover_matrices, run_bench, BenchConfig};
use crate::error::{Error, Result};
use crate::mtx::{read_matrix_market_file, read_vector_file, write_matrix_market_file, write_vector_file, MtxVector};
use crate::record::{write_records, write_records_file, RunRecord};
use crate::run::{InitialGuess, LinearSystem, PrecondKind, SolverConfig, SolverKind};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "aar", version, about = "Alternating Anderson-Richardson and Krylov solvers for sparse systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one system read from Matrix Market files.
    Solve(SolveArgs),
    /// Sweep solvers and preconditioners over a directory of matrices.
    Bench(BenchArgs),
    /// Write a finite-difference test system.
    Generate(GenerateArgs),
}

/// Solver knobs shared by `solve` and `bench`.
#[derive(Debug, Args)]
pub struct Knobs {
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Richardson relaxation.
    #[arg(long, default_value_t = 0.6)]
    pub omega: f64,
    /// Anderson relaxation.
    #[arg(long, default_value_t = 0.6)]
    pub beta: f64,
    /// Anderson history length.
    #[arg(long, default_value_t = 9)]
    pub m: usize,
    /// Extrapolation period (check interval for `richardson`).
    #[arg(long, default_value_t = 8)]
    pub p: usize,
    /// GMRES restart length.
    #[arg(long, default_value_t = 30)]
    pub restart: usize,
    /// Diagonal blocks for `block-ilu0`.
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
    /// Pseudoinverse cutoff for the Anderson Gram matrix.
    #[arg(long, default_value_t = 1e-14)]
    pub rcond: f64,
    #[arg(long, value_enum, default_value_t = InitialGuess::Ones)]
    pub x0: InitialGuess,
    /// Include preconditioner construction in the reported wall time.
    #[arg(long)]
    pub include_setup: bool,
}

impl Knobs {
    fn config(&self, solver: SolverKind, precond: PrecondKind, time_limit: Option<f64>) -> Result<SolverConfig> {
        let time_limit = match time_limit {
            Some(t) if !(t > 0.0 && t.is_finite()) => return Err(Error::Usage("--time-limit must be positive".into())),
            t => t.map(Duration::from_secs_f64),
        };
        if self.blocks == 0 {
            return Err(Error::Usage("--blocks must be at least 1".into()));
        }
        Ok(SolverConfig {
            solver,
            precond,
            blocks: self.blocks,
            tol: self.tol,
            max_iter: self.max_iter,
            omega: self.omega,
            beta: self.beta,
            m: self.m,
            p: self.p,
            restart: self.restart,
            rcond: self.rcond,
            time_limit,
            include_setup: self.include_setup,
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Right-hand side; defaults to `A·ones`.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SolverKind::Aar)]
    pub solver: SolverKind,
    #[arg(long, value_enum, default_value_t = PrecondKind::Ilu0)]
    pub precond: PrecondKind,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Write the solution as a Matrix Market array.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the residual history as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "aar,gmres,bicgstab")]
    pub solvers: Vec<SolverKind>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "jacobi,ilu0")]
    pub preconds: Vec<PrecondKind>,
    /// Per-run wall-clock limit in seconds.
    #[arg(long, default_value_t = 1000.0)]
    pub time_limit: f64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (further capped by AAR_SOLVE_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Poisson,
    Helmholtz,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub problem: Problem,
    /// Points per axis, `nx,ny,nz`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<usize>,
    /// Side lengths in Bohr, `Lx,Ly,Lz`; defaults to a 0.486 Bohr mesh.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes `<prefix>.mtx` and `<prefix>_rhs.mtx`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_CONVERGED };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Bench(a) => cmd_bench(&a).map(|()| EXIT_CONVERGED),
        Command::Generate(a) => cmd_generate(&a).map(|()| EXIT_CONVERGED),
    };
    result.unwrap_or_else(|e| {
        eprintln!("aar: {e}");
        EXIT_ERROR
    })
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let cfg = args.knobs.config(args.solver, args.precond, args.time_limit)?;
    let matrix = read_matrix_market_file(&args.matrix)?;
    let rhs = args.rhs.as_ref().map(read_vector_file).transpose()?;
    let system = LinearSystem::new(matrix, rhs).map_err(|e| e.in_file(&args.matrix))?;
    let out = system.solve(args.knobs.x0, &cfg)?;

    let record = RunRecord {
        matrix_name: matrix_name(&args.matrix),
        n: system.len(),
        solver: args.solver.name().to_owned(),
        preconditioner: args.precond.name().to_owned(),
        converged: out.converged(),
        iterations: out.iterations,
        final_relative_residual: out.final_relative_residual,
        wall_time_seconds: out.seconds,
    };
    write_records(io::stdout().lock(), &[record])?;

    if let Some(path) = &args.out {
        match &out.solution {
            MtxVector::Real(x) => write_vector_file(path, x)?,
            MtxVector::Complex(x) => write_vector_file(path, x)?,
        }
    }
    if let Some(path) = &args.trace {
        write_trace(path, &out.residual_trace)?;
    }
    if out.converged() {
        Ok(EXIT_CONVERGED)
    } else {
        eprintln!("aar: not converged: {}", out.status);
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn matrix_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write_trace(path: &Path, trace: &[(usize, f64)]) -> Result<()> {
    let write = || -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(["iteration", "relative_residual"])?;
        for (k, r) in trace {
            w.write_record([k.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| e.in_file(path))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let base = args.knobs.config(SolverKind::Aar, PrecondKind::None, Some(args.time_limit))?;
    let matrices = discover_matrices(&args.dir)?;
    let cfg = BenchConfig {
        solvers: args.solvers.clone(),
        preconds: args.preconds.clone(),
        base,
        x0: args.knobs.x0,
        threads: args.threads,
    };
    let rows = run_bench(&matrices, &cfg, &|msg| eprintln!("aar: {msg}"));
    match &args.out {
        Some(path) => write_records_file(path, &rows),
        None => {
            let mut out = io::stdout().lock();
            write_records(&mut out, &rows)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let n: [usize; 3] =
        args.grid.as_slice().try_into().map_err(|_| Error::Usage("--grid takes exactly three counts".into()))?;
    let lengths: [f64; 3] = match &args.lengths {
        Some(l) => l.as_slice().try_into().map_err(|_| Error::Usage("--lengths takes exactly three values".into()))?,
        None => n.map(|k| k as f64 * MESH_COARSE),
    };
    let grid = GridSpec::new(n, lengths)?;
    let density = synthetic_density(&grid, args.seed);

    let mut base = args.out_prefix.clone().into_os_string();
    let matrix_path = {
        let mut p = base.clone();
        p.push(".mtx");
        PathBuf::from(p)
    };
    base.push("_rhs.mtx");
    let rhs_path = PathBuf::from(base);

    match args.problem {
        Problem::Poisson => {
            let (a, b) = build_poisson_system(&grid, &density)?;
            write_matrix_market_file(&matrix_path, &a)?;
            write_vector_file(&rhs_path, &b)?;
        }
        Problem::Helmholtz => {
            let (a, b) = build_helmholtz_system(&grid, &density)?;
            write_matrix_market_file(&matrix_path, &a)?;
            write_vector_file(&rhs_path, &b)?;
        }
    }
    Ok(())
}
