//! File formats, benchmark sweeps and the command-line front end for
//! [`aar_core`].

pub mod bench;
pub mod cli;
pub mod error;
pub mod mtx;
pub mod record;
pub mod run;

pub use crate::error::{Error, Result};
pub use crate::mtx::{
    read_matrix_market, read_matrix_market_file, read_vector, read_vector_file, write_matrix_market,
    write_matrix_market_file, write_vector, write_vector_file, MtxMatrix, MtxVector,
};
pub use crate::record::RunRecord;
pub use crate::run::{InitialGuess, LinearSystem, PrecondKind, SolverConfig, SolverKind};
