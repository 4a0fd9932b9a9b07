//! Complex sparse storage, Hermitian positive definite direct/iterative
//! solves, and small dense Hermitian eigenproblems.

mod cg;
mod csr;
mod dense;
mod ldl;
mod ordering;

pub use cg::{conjugate_gradient, CgOutcome};
pub use csr::{assemble, CsrMatrix, HermitianSparse, RealSparse, Scalar};
pub use dense::{dense_hermitian_geig, dense_hermitian_geig_truncated, GeneralizedEigen, MASS_RANK_TOL};
pub use ldl::{factor_hpd, factor_hpd_with, solve, LdlFactor, SymbolicLdl};
pub use ordering::{minimum_degree, nested_dissection, AdjacencyGraph, Ordering};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("entry ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("non-positive pivot {value:e} at row {row}")]
    NonPositivePivot { row: usize, value: f64 },
    #[error("mass matrix is numerically rank deficient (numerical rank {0})")]
    RankDeficientMass(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("dense eigensolver failed: {0}")]
    Eigensolver(String),
}
