use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::elements::{contract_metric, FeSystem};

use super::DpgError;

/// Real element matrices of one triangle in local order. Rows index the
/// broken test basis; trial columns include Dirichlet DOFs.
#[derive(Debug, Clone)]
pub struct LocalBlocks {
    /// H^1(K) inner product of the test functions.
    pub gram: DMatrix<f64>,
    /// int u_j v_i.
    pub mass: DMatrix<f64>,
    /// int grad u_j . grad v_i.
    pub stiffness: DMatrix<f64>,
    /// sigma |e| int_e P_j v_i for the 3p edge functions.
    pub flux: DMatrix<f64>,
}

impl LocalBlocks {
    pub fn new(system: &FeSystem, t: usize) -> Self {
        let tables = system.tables();
        let g = system.geometry(t);
        let jac = g.det.abs();
        let test_mass = &tables.test_mass * jac;
        let gram = contract_metric(&g.metric, &tables.test_grad) * jac + test_mass;
        let mass = &tables.mixed_mass * jac;
        let stiffness = contract_metric(&g.metric, &tables.mixed_grad) * jac;
        let flux = system.flux_trace_matrix(t).transpose();
        Self {
            gram,
            mass,
            stiffness,
            flux,
        }
    }

    /// B_K for shift `a = z + nu`: columns are trial functions then edge
    /// flux functions.
    pub fn coupling(&self, a: Complex64) -> DMatrix<Complex64> {
        let (nv, nu, nf) = (self.gram.nrows(), self.mass.ncols(), self.flux.ncols());
        DMatrix::from_fn(nv, nu + nf, |i, j| {
            if j < nu {
                a * self.mass[(i, j)] - self.stiffness[(i, j)]
            } else {
                Complex64::new(self.flux[(i, j - nu)], 0.0)
            }
        })
    }

    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>, DpgError> {
        Cholesky::new(self.gram.clone()).ok_or(DpgError::GramNotDefinite)
    }

    /// Whitened blocks Q = L^{-1} [M | K | B_flux] with G = L L^T.
    pub fn whitened(&self) -> Result<DMatrix<f64>, DpgError> {
        let chol = self.cholesky()?;
        let (nu, nf) = (self.mass.ncols(), self.flux.ncols());
        let mut q = DMatrix::zeros(self.gram.nrows(), 2 * nu + nf);
        q.columns_mut(0, nu).copy_from(&self.mass);
        q.columns_mut(nu, nu).copy_from(&self.stiffness);
        q.columns_mut(2 * nu, nf).copy_from(&self.flux);
        chol.l_dirty().solve_lower_triangular_mut(&mut q);
        Ok(q)
    }
}

/// z-independent products Q^T Q of the whitened element blocks, from which
/// the condensed element matrix and load map follow for any shift.
#[derive(Debug, Clone)]
pub(crate) struct ElementGram {
    pub nu: usize,
    pub nf: usize,
    /// Symmetric, order 2 nu + nf, blocks [P S F].
    pub gram: DMatrix<f64>,
}

impl ElementGram {
    pub fn new(blocks: &LocalBlocks) -> Result<Self, DpgError> {
        let q = blocks.whitened()?;
        let mut gram = q.tr_mul(&q);
        let n = gram.nrows();
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (gram[(i, j)] + gram[(j, i)]);
                gram[(i, j)] = s;
                gram[(j, i)] = s;
            }
        }
        Ok(Self {
            nu: blocks.mass.ncols(),
            nf: blocks.flux.ncols(),
            gram,
        })
    }

    /// W^H W with W = a P - S on trial columns and F on flux columns.
    /// Written column-major into `out` (order nu + nf).
    pub fn condensed(&self, a: Complex64, out: &mut [Complex64]) {
        let (nu, nf) = (self.nu, self.nf);
        let n = nu + nf;
        let g = &self.gram;
        let (p, s, f) = (0, nu, 2 * nu);
        let aa = a.norm_sqr();
        for j in 0..n {
            for i in 0..n {
                let v = match (i < nu, j < nu) {
                    (true, true) => {
                        Complex64::new(aa * g[(p + i, p + j)] + g[(s + i, s + j)], 0.0)
                            - a.conj() * g[(p + i, s + j)]
                            - a * g[(s + i, p + j)]
                    }
                    (true, false) => a.conj() * g[(p + i, f + j - nu)] - g[(s + i, f + j - nu)],
                    (false, true) => a * g[(f + i - nu, p + j)] - g[(f + i - nu, s + j)],
                    (false, false) => Complex64::new(g[(f + i - nu, f + j - nu)], 0.0),
                };
                out[j * n + i] = v;
            }
        }
    }

    /// W^H P f for local trial coefficients f.
    pub fn load(&self, a: Complex64, f: &[Complex64], out: &mut [Complex64]) {
        let (nu, nf) = (self.nu, self.nf);
        let g = &self.gram;
        for i in 0..nu {
            let mut pp = Complex64::new(0.0, 0.0);
            let mut sp = Complex64::new(0.0, 0.0);
            for (j, fj) in f.iter().enumerate() {
                pp += fj * g[(i, j)];
                sp += fj * g[(nu + i, j)];
            }
            out[i] = a.conj() * pp - sp;
        }
        for i in 0..nf {
            out[nu + i] = f
                .iter()
                .enumerate()
                .map(|(j, fj)| fj * g[(2 * nu + i, j)])
                .sum();
        }
    }
}
