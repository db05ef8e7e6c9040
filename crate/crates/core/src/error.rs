use thiserror::Error;

use crate::completion::PairConflict;
use crate::pairs::PairIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error("column {0} has unknown entries")]
    UnknownEntries(PairIndex),

    #[error("invalid number {0:?}: expected an integer, a terminating decimal or a fraction p/q")]
    InvalidNumber(String),

    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of bounds: {0}")]
    OutOfBounds(String),

    /// No 2-minors exist, so the S^2-rank test is vacuous.
    #[error("S^2-rank test is vacuous for s={s}, d={d} (needs s >= 4 and d >= 2)")]
    TooSmall { s: usize, d: usize },

    #[error("the pair family is identically zero")]
    ZeroFamily,

    #[error("P({i} < X <= {j}) = 0")]
    ZeroPairMass { i: usize, j: usize },

    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),

    #[error("table is not column-stochastic: {0}")]
    NotStochastic(String),

    #[error("the weight system has no strictly positive solution ray")]
    NoPositiveRay,

    #[error("the solution space has dimension {dim}; weights are not determined")]
    Underdetermined { dim: usize },

    #[error("inconsistent: {0}")]
    Inconsistent(String),

    #[error("cocycle identity fails on pair {pair}")]
    CocycleViolation { pair: PairIndex },

    #[error("incompatible tables: {} conflicting pair(s)", .0.len())]
    IncompatibleTables(Vec<PairConflict>),

    #[error("invalid refinement map: {0}")]
    InvalidRefinement(String),

    #[error("cofactor expansion limited to n <= 8, got n = {n}")]
    TooLarge { n: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
