use num_complex::Complex64;

use super::HermitianSparse;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    /// Final ||b - A x|| / ||b||.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradients for Hermitian positive definite
/// systems, started from zero.
pub fn conjugate_gradient(a: &HermitianSparse, b: &[Complex64], tol: f64, max_iter: usize) -> CgOutcome {
    let n = a.nrows();
    assert_eq!(b.len(), n);
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if d.re > 0.0 { 1.0 / d.re } else { 1.0 })
        .collect();
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        x.iter().zip(y).map(|(u, v)| u.conj() * v).sum()
    };
    let bnorm = dot(b, b).re.sqrt();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut r = b.to_vec();
    let mut z: Vec<Complex64> = r.iter().zip(&inv_diag).map(|(v, d)| v * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    let mut rel = 1.0;
    for it in 0..max_iter {
        let ap = a.mul_vec(&p);
        let alpha = rz / dot(&p, &ap).re;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        rel = dot(&r, &r).re.sqrt() / bnorm;
        if rel <= tol {
            return CgOutcome {
                solution: x,
                iterations: it + 1,
                relative_residual: rel,
                converged: true,
            };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + p[i] * beta;
        }
    }
    CgOutcome {
        solution: x,
        iterations: max_iter,
        relative_residual: rel,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{assemble, factor_hpd};

    #[test]
    fn matches_direct_solve() {
        let n = 40;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, Complex64::new(4.0, 0.0)));
            if i + 1 < n {
                trip.push((i, i + 1, Complex64::new(-1.0, 0.5)));
                trip.push((i + 1, i, Complex64::new(-1.0, -0.5)));
            }
        }
        let a = assemble(n, trip).unwrap();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, i as f64)).collect();
        let cg = conjugate_gradient(&a, &b, 1e-13, 500);
        assert!(cg.converged);
        let direct = factor_hpd(&a).unwrap().solve(&b, 1);
        for (u, v) in cg.solution.iter().zip(&direct) {
            assert!((u - v).norm() < 1e-10 * (1.0 + v.norm()));
        }
    }
}
