use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::SparseError;

/// Directions of the mass matrix with eigenvalue below this fraction of the
/// largest one are treated as numerically null.
pub const MASS_RANK_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// M-orthonormal columns matching `values`.
    pub vectors: DMatrix<Complex64>,
}

fn hermitian_part(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

fn sorted_eigen(c: DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>), SparseError> {
    let n = c.nrows();
    if n == 0 {
        return Ok((Vec::new(), c));
    }
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, 0)
        .ok_or_else(|| SparseError::Eigensolver("Hermitian eigensolver did not converge".into()))?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, idx[k])]);
    Ok((values, vectors))
}

/// Whitening transform T (M = U S U^H, T = U_k S_k^{-1/2}) over the directions
/// of M above the rank threshold. Returns (T, numerical rank).
fn whitening(m: &DMatrix<Complex64>, rel_tol: f64) -> Result<(DMatrix<Complex64>, usize), SparseError> {
    let n = m.nrows();
    let (s, u) = sorted_eigen(hermitian_part(m))?;
    let smax = s.last().copied().unwrap_or(0.0);
    if !(smax > 0.0) {
        return Ok((DMatrix::zeros(n, 0), 0));
    }
    let keep: Vec<usize> = (0..n).filter(|&k| s[k] > rel_tol * smax).collect();
    let t = DMatrix::from_fn(n, keep.len(), |r, c| u[(r, keep[c])] / s[keep[c]].sqrt());
    Ok((t, keep.len()))
}

/// Solves A v = lambda M v for Hermitian A and Hermitian positive definite M.
///
/// Fails with `RankDeficientMass(k)` when M has numerical rank k < m; use
/// [`dense_hermitian_geig_truncated`] to continue on the well-conditioned part.
pub fn dense_hermitian_geig(
    a: &DMatrix<Complex64>,
    m: &DMatrix<Complex64>,
) -> Result<GeneralizedEigen, SparseError> {
    check_square(a, m)?;
    let (t, rank) = whitening(m, MASS_RANK_TOL)?;
    if rank < m.nrows() {
        return Err(SparseError::RankDeficientMass(rank));
    }
    project(a, t)
}

/// Like [`dense_hermitian_geig`] but restricted to the numerically nonsingular
/// part of M; returns as many eigenpairs as the numerical rank.
pub fn dense_hermitian_geig_truncated(
    a: &DMatrix<Complex64>,
    m: &DMatrix<Complex64>,
    rel_tol: f64,
) -> Result<GeneralizedEigen, SparseError> {
    check_square(a, m)?;
    let (t, _) = whitening(m, rel_tol)?;
    project(a, t)
}

fn project(a: &DMatrix<Complex64>, t: DMatrix<Complex64>) -> Result<GeneralizedEigen, SparseError> {
    let c = hermitian_part(&(t.adjoint() * a * &t));
    let (values, w) = sorted_eigen(c)?;
    Ok(GeneralizedEigen {
        values,
        vectors: t * w,
    })
}

fn check_square(a: &DMatrix<Complex64>, m: &DMatrix<Complex64>) -> Result<(), SparseError> {
    if !a.is_square() {
        return Err(SparseError::NotSquare(a.nrows(), a.ncols()));
    }
    if a.shape() != m.shape() {
        return Err(SparseError::DimensionMismatch {
            expected: a.nrows(),
            got: m.nrows(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        hermitian_part(&g)
    }

    fn random_hpd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        &g * g.adjoint() + DMatrix::identity(n, n) * Complex64::new(n as f64 * 0.1, 0.0)
    }

    #[test]
    fn diagonal_pair() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        let m = DMatrix::identity(2, 2);
        let e = dense_hermitian_geig(&a, &m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn equal_pair_gives_unit_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_hpd(6, &mut rng);
        let e = dense_hermitian_geig(&m, &m).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn random_pair_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(10, &mut rng);
        let m = random_hpd(10, &mut rng);
        let e = dense_hermitian_geig(&a, &m).unwrap();
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            10,
            e.values.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let res = &a * &e.vectors - &m * &e.vectors * lam;
        assert!(res.camax() <= 1e-10);
        let orth = e.vectors.adjoint() * &m * &e.vectors - DMatrix::identity(10, 10);
        assert!(orth.camax() <= 1e-10);
    }

    #[test]
    fn singular_mass_is_reported_and_truncated() {
        let v = DMatrix::from_fn(4, 2, |r, c| Complex64::new((r + c) as f64, r as f64 - c as f64));
        let m = &v * v.adjoint();
        let a = DMatrix::<Complex64>::identity(4, 4);
        assert_eq!(
            dense_hermitian_geig(&a, &m).unwrap_err(),
            SparseError::RankDeficientMass(2)
        );
        let e = dense_hermitian_geig_truncated(&a, &m, MASS_RANK_TOL).unwrap();
        assert_eq!(e.values.len(), 2);
        assert_eq!(e.vectors.ncols(), 2);
    }
}
