//! Reference spectra, eigenvalue and eigenspace error measures, and observed
//! convergence orders.

mod reference;

pub use reference::{
    reference_fiber, reference_lshape, reference_square, FiberParameters, ReferenceSpectrum, SpectrumSource,
    SquareMode,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::elements::{eval_trial_basis, quadrature, FeSystem, DIRICHLET};
use crate::sparse::RealSparse;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("empty set")]
    EmptySet,
    #[error("basis is numerically rank deficient")]
    RankDeficientBasis,
    #[error("error values must be positive, got {0:e} at index {1}")]
    NonPositiveError(f64, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("vector has zero norm in the metric")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Hausdorff distance between two finite sets of reals.
pub fn hausdorff(a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::EmptySet);
    }
    let one_sided = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|u| y.iter().map(|v| (u - v).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

fn metric_apply(metric: &RealSparse, v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_vec(metric.mul_vec(v.as_slice()))
}

/// Distance from v to span(basis) in the norm induced by `metric`.
///
/// The projection is computed from the metric Gram matrix of the basis and
/// the distance as the metric norm of the explicit residual, which avoids
/// the cancellation in sqrt(|v|^2 - |proj|^2) for nearby subspaces.
pub fn subspace_distance(
    v: &DVector<Complex64>,
    basis: &DMatrix<Complex64>,
    metric: &RealSparse,
) -> Result<f64, AnalysisError> {
    if v.len() != metric.nrows() || basis.nrows() != metric.nrows() {
        return Err(AnalysisError::DimensionMismatch {
            expected: metric.nrows(),
            got: if v.len() != metric.nrows() { v.len() } else { basis.nrows() },
        });
    }
    let k = basis.ncols();
    let mut kb = DMatrix::zeros(basis.nrows(), k);
    for c in 0..k {
        let col: Vec<Complex64> = basis.column(c).iter().copied().collect();
        kb.column_mut(c).copy_from_slice(&metric.mul_vec(&col));
    }
    let gram = basis.adjoint() * &kb;
    let rhs = kb.adjoint() * v;
    let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    // pivoted check of the basis rank through the Gram eigenvalues
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if k > 0 && (max == 0.0 || eig.eigenvalues.iter().any(|&e| e <= 1e-14 * max)) {
        return Err(AnalysisError::RankDeficientBasis);
    }
    let coeffs = if k == 0 {
        DVector::zeros(0)
    } else {
        gram.cholesky().ok_or(AnalysisError::RankDeficientBasis)?.solve(&rhs)
    };
    let r = v - basis * coeffs;
    let kr = metric_apply(metric, &r);
    Ok(r.dotc(&kr).re.max(0.0).sqrt())
}

/// Metric norm sqrt(v^H K v).
pub fn metric_norm(v: &DVector<Complex64>, metric: &RealSparse) -> f64 {
    v.dotc(&metric_apply(metric, v)).re.max(0.0).sqrt()
}

/// Nodal interpolant of f in the trial space (boundary values are dropped).
pub fn interpolate(system: &FeSystem, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    system.trial_points().iter().map(|&[x, y]| f(x, y)).collect()
}

/// Broken H^1 seminorm of u - u_h given the exact gradient.
pub fn h1_seminorm_error(
    system: &FeSystem,
    u_h: &[Complex64],
    grad_exact: impl Fn(f64, f64) -> [f64; 2],
) -> f64 {
    let p = system.p();
    let rule = quadrature(2 * p + 6).expect("supported degree");
    let tab: Vec<(Vec<f64>, Vec<[f64; 2]>)> = rule.points.iter().map(|&b| eval_trial_basis(p, b)).collect();
    let mut total = 0.0;
    for t in 0..system.mesh().num_triangles() {
        let g = system.geometry(t);
        // inverse Jacobian transpose maps reference to physical gradients
        let j = g.jacobian;
        let det = g.det;
        let jit = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        let dofs = system.trial_dofs(t);
        for (q, (_, grads)) in tab.iter().enumerate() {
            let mut gh = [Complex64::new(0.0, 0.0); 2];
            for (k, &d) in dofs.iter().enumerate() {
                if d == DIRICHLET {
                    continue;
                }
                let gr = grads[k];
                gh[0] += u_h[d] * (jit[0][0] * gr[0] + jit[0][1] * gr[1]);
                gh[1] += u_h[d] * (jit[1][0] * gr[0] + jit[1][1] * gr[1]);
            }
            let x = g.map(rule.xy(q));
            let ge = grad_exact(x[0], x[1]);
            total += rule.weights[q] * det.abs() * ((gh[0] - ge[0]).norm_sqr() + (gh[1] - ge[1]).norm_sqr());
        }
    }
    total.sqrt()
}

/// Numerical orders of convergence log2(e_{l-1} / e_l) between consecutive
/// levels of halved mesh size.
pub fn noc(errors: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    if let Some((i, &e)) = errors.iter().enumerate().find(|(_, &e)| !(e > 0.0)) {
        return Err(AnalysisError::NonPositiveError(e, i));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Least-squares slope of log(error) against log(h).
pub fn fitted_rate(h: &[f64], errors: &[f64]) -> Result<f64, AnalysisError> {
    if h.len() != errors.len() {
        return Err(AnalysisError::DimensionMismatch {
            expected: h.len(),
            got: errors.len(),
        });
    }
    if h.len() < 2 {
        return Err(AnalysisError::TooFewValues { needed: 2, got: h.len() });
    }
    if let Some((i, &e)) = errors.iter().enumerate().find(|(_, &e)| !(e > 0.0)) {
        return Err(AnalysisError::NonPositiveError(e, i));
    }
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Eigenspace error proxy: for computed vectors E_h and interpolated exact
/// eigenfunctions I_h E, the sum over i of dist(e_{i,h}, I_h E) and
/// dist(I_h e_i, E_h), each argument scaled to unit norm in the metric.
pub fn eigenspace_distance(
    computed: &DMatrix<Complex64>,
    exact_interpolated: &DMatrix<Complex64>,
    metric: &RealSparse,
) -> Result<f64, AnalysisError> {
    let mut total = 0.0;
    for (from, to) in [(computed, exact_interpolated), (exact_interpolated, computed)] {
        for c in 0..from.ncols() {
            let v: DVector<Complex64> = from.column(c).into_owned();
            let norm = metric_norm(&v, metric);
            if !(norm > 0.0) {
                return Err(AnalysisError::ZeroVector);
            }
            total += subspace_distance(&(v / Complex64::new(norm, 0.0)), to, metric)?;
        }
    }
    Ok(total)
}
