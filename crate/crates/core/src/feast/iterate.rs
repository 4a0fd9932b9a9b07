use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dpg::{assemble_trial_forms, DpgAssembler, DpgOperator, LinearSolver, Reaction};
use crate::elements::FeSystem;
use crate::sparse::{dense_hermitian_geig, dense_hermitian_geig_truncated, RealSparse, SparseError, MASS_RANK_TOL};

use super::{FeastError, RationalFilter};

#[derive(Debug, Clone, PartialEq)]
pub struct FeastOptions {
    /// Subspace dimension.
    pub m0: usize,
    /// Stop when the largest relative change of the Ritz values inside the
    /// contour drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Once the inside count has been steady for three iterations and the
    /// change is below this, the subspace is cut down to the inside Ritz
    /// vectors. Zero disables truncation.
    pub truncate_tol: f64,
    /// Seed of the random initial subspace.
    pub seed: u64,
    pub solver: LinearSolver,
}

impl Default for FeastOptions {
    fn default() -> Self {
        Self {
            m0: 8,
            tol: 1e-12,
            max_iter: 50,
            truncate_tol: 1e-6,
            seed: 0,
            solver: LinearSolver::Direct,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// All Ritz values of the current subspace, ascending.
    pub ritz_values: Vec<f64>,
    pub inside_count: usize,
    /// Largest relative change of the inside Ritz values (infinite on the
    /// first iteration or when nothing is inside).
    pub max_change: f64,
    /// Subspace dimension after any truncation.
    pub subspace_dim: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralCluster {
    /// Ritz values inside the contour interval, ascending.
    pub ritz_values: Vec<f64>,
    /// Matching M-orthonormal trial coefficient columns.
    pub vectors: DMatrix<Complex64>,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    /// Wall-clock seconds to factor each node's operator.
    pub factor_seconds: Vec<f64>,
}

impl SpectralCluster {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn final_change(&self) -> f64 {
        self.history.last().map_or(f64::INFINITY, |r| r.max_change)
    }
}

/// Discretized filtered operator S = w_N + sum_k w_k R_h(z_k) with one
/// factored DPG operator per node.
pub struct FilteredResolvent {
    filter: RationalFilter,
    operators: Vec<DpgOperator>,
    factor_seconds: Vec<f64>,
}

impl FilteredResolvent {
    pub fn new(assembler: &DpgAssembler, filter: &RationalFilter, solver: LinearSolver) -> Result<Self, FeastError> {
        // shared symbolic analysis before the parallel numeric phase
        if solver == LinearSolver::Direct {
            assembler.symbolic()?;
        }
        let built: Vec<(DpgOperator, f64)> = filter
            .nodes
            .par_iter()
            .map(|&z| {
                let start = Instant::now();
                let op = assembler.operator(z, solver)?;
                Ok((op, start.elapsed().as_secs_f64()))
            })
            .collect::<Result<_, FeastError>>()?;
        let (operators, factor_seconds) = built.into_iter().unzip();
        Ok(Self {
            filter: filter.clone(),
            operators,
            factor_seconds,
        })
    }

    pub fn filter(&self) -> &RationalFilter {
        &self.filter
    }

    pub fn factor_seconds(&self) -> &[f64] {
        &self.factor_seconds
    }

    /// Applies S to every column. Node contributions are computed in
    /// parallel and summed in node order.
    pub fn apply(&self, y: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, FeastError> {
        let parts: Vec<DMatrix<Complex64>> = self
            .operators
            .par_iter()
            .zip(self.filter.weights.par_iter())
            .map(|(op, &w)| Ok(op.apply_resolvent(y)? * w))
            .collect::<Result<_, FeastError>>()?;
        let mut out = y * self.filter.w_n;
        for part in parts {
            out += part;
        }
        Ok(out)
    }
}

fn project(a: &RealSparse, y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let ay = DMatrix::from_vec(y.nrows(), y.ncols(), a.mul_block(y.as_slice(), y.ncols()));
    y.adjoint() * ay
}

/// Rayleigh-Ritz on span(y) for the pencil (a, mass). Returns ascending
/// Ritz values and the rotated, M-orthonormal basis; a numerically singular
/// mass Gram truncates the basis.
fn rayleigh_ritz(
    a: &RealSparse,
    mass: &RealSparse,
    y: &DMatrix<Complex64>,
) -> Result<(Vec<f64>, DMatrix<Complex64>), FeastError> {
    let a_s = project(a, y);
    let m_s = project(mass, y);
    let eig = match dense_hermitian_geig(&a_s, &m_s) {
        Ok(e) => e,
        Err(SparseError::RankDeficientMass(_)) => dense_hermitian_geig_truncated(&a_s, &m_s, MASS_RANK_TOL)?,
        Err(e) => return Err(e.into()),
    };
    Ok((eig.values, y * eig.vectors))
}

fn relative_change(current: &[f64], previous: &[f64]) -> f64 {
    if current.is_empty() || previous.is_empty() {
        return f64::INFINITY;
    }
    current
        .iter()
        .map(|&l| {
            let nearest = previous.iter().map(|&p| (l - p).abs()).fold(f64::INFINITY, f64::min);
            nearest / l.abs()
        })
        .fold(0.0, f64::max)
}

/// Deterministic pseudo-random starting block.
pub fn initial_subspace(n: usize, m0: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, m0, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
}

/// Filtered subspace iteration with Rayleigh-Ritz extraction for the form
/// a(u, v) = (grad u, grad v) - (nu u, v) on the trial space.
pub fn feast_iterate(
    system: Arc<FeSystem>,
    filter: &RationalFilter,
    reaction: &Reaction,
    options: &FeastOptions,
) -> Result<SpectralCluster, FeastError> {
    let assembler = DpgAssembler::new(system, reaction.clone())?;
    feast_iterate_with(&assembler, filter, options)
}

pub fn feast_iterate_with(
    assembler: &DpgAssembler,
    filter: &RationalFilter,
    options: &FeastOptions,
) -> Result<SpectralCluster, FeastError> {
    let system = assembler.system();
    let n = system.n_trial();
    if options.m0 == 0 || options.m0 > n {
        return Err(FeastError::InvalidSubspace { m0: options.m0, n });
    }
    let forms = assemble_trial_forms(system, assembler.reaction());
    let resolvent = FilteredResolvent::new(assembler, filter, options.solver)?;

    let (_, mut y) = rayleigh_ritz(&forms.a, &forms.mass, &initial_subspace(n, options.m0, options.seed))?;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut previous_inside: Vec<f64> = Vec::new();
    for iteration in 1..=options.max_iter {
        let filtered = resolvent.apply(&y)?;
        let (values, rotated) = rayleigh_ritz(&forms.a, &forms.mass, &filtered)?;
        y = rotated;
        let cols: Vec<usize> = (0..values.len()).filter(|&k| filter.contains(values[k])).collect();
        let inside: Vec<f64> = cols.iter().map(|&k| values[k]).collect();
        let max_change = relative_change(&inside, &previous_inside);
        let steady = history.len() >= 2
            && history[history.len() - 2..].iter().all(|r| r.inside_count == inside.len());
        let converged = !inside.is_empty() && max_change < options.tol;
        // outside directions that never settle would otherwise keep
        // perturbing the inside Ritz values
        if converged || (steady && !inside.is_empty() && max_change < options.truncate_tol && cols.len() < y.ncols()) {
            y = DMatrix::from_fn(n, cols.len(), |r, c| y[(r, cols[c])]);
        }
        history.push(IterationRecord {
            iteration,
            ritz_values: values,
            inside_count: inside.len(),
            max_change,
            subspace_dim: y.ncols(),
        });
        if converged {
            return Ok(SpectralCluster {
                ritz_values: inside,
                vectors: y,
                history,
                converged: true,
                factor_seconds: resolvent.factor_seconds().to_vec(),
            });
        }
        previous_inside = inside;
    }
    if previous_inside.is_empty() {
        Err(FeastError::NoEigenvaluesInContour {
            iterations: options.max_iter,
        })
    } else {
        Err(FeastError::NotConverged {
            iterations: options.max_iter,
            last_change: history.last().map_or(f64::INFINITY, |r| r.max_change),
            history,
        })
    }
}
