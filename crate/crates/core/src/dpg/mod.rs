//! DPG discretization of the shifted operator z - A with A = -Laplace - nu,
//! statically condensed to a Hermitian positive definite system over the
//! trial and flux unknowns.

mod forms;
mod local;
mod operator;

pub use forms::{assemble_trial_forms, TrialForms};
pub use local::LocalBlocks;
pub use operator::{error_indicator, DpgAssembler, DpgOperator, LinearSolver, ResolventSolution};

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::elements::FeSystem;
use crate::sparse::SparseError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpgError {
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error("element Gram matrix is not positive definite")]
    GramNotDefinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    CgNotConverged { iterations: usize, residual: f64 },
}

/// Piecewise-constant reaction coefficient nu keyed by mesh region tag.
/// Tags without an entry get nu = 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reaction {
    values: BTreeMap<u32, f64>,
}

impl Reaction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        Self {
            values: pairs.into_iter().collect(),
        }
    }

    pub fn value(&self, tag: u32) -> f64 {
        self.values.get(&tag).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }
}

/// Assembles and factors the DPG operator for a single shift.
pub fn assemble_dpg(system: Arc<FeSystem>, z: Complex64, reaction: Reaction) -> Result<DpgOperator, DpgError> {
    DpgAssembler::new(system, reaction)?.operator(z, LinearSolver::Direct)
}
