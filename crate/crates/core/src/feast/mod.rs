//! Rational filters and filtered subspace iteration with DPG resolvents.

mod filter;
mod iterate;

pub use filter::{build_filter, eval_filter, filter_diagnostics, FilterDiagnostics, RationalFilter};
pub use iterate::{
    feast_iterate, feast_iterate_with, initial_subspace, FeastOptions, FilteredResolvent, IterationRecord,
    SpectralCluster,
};

use thiserror::Error;

use crate::dpg::DpgError;
use crate::sparse::SparseError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeastError {
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("subspace dimension {m0} is not in 1..={n}")]
    InvalidSubspace { m0: usize, n: usize },
    #[error("no Ritz values inside the contour after {iterations} iterations")]
    NoEigenvaluesInContour { iterations: usize },
    #[error("not converged after {iterations} iterations (last relative change {last_change:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        history: Vec<IterationRecord>,
    },
    #[error(transparent)]
    Dpg(#[from] DpgError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}
