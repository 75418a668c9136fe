use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("triplet #{index} ({row}, {col}) is outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        index: usize,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("malformed CSR structure: {0}")]
    InvalidStructure(&'static str),

    #[error("matrix is not square ({nrows}x{ncols})")]
    NotSquare { nrows: usize, ncols: usize },

    #[error("diagonal entry of row {row} is not stored")]
    MissingDiagonal { row: usize },

    #[error("diagonal entry of row {row} is zero or not finite")]
    ZeroDiagonal { row: usize },

    #[error("zero pivot at row {row} during ILU(0) factorization")]
    ZeroPivot { row: usize },

    #[error("block {block} failed to factor: {source}")]
    BlockFactor {
        block: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("invalid number of blocks {nblocks} for {n} rows")]
    InvalidBlockCount { nblocks: usize, n: usize },

    #[error("invalid solver option: {0}")]
    InvalidOption(&'static str),

    #[error("unsupported finite-difference order {0} (expected 2, 4 or 6)")]
    UnsupportedOrder(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("density entry {index} is negative or not finite")]
    NegativeDensity { index: usize },
}
