use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::elements::{FeSystem, DIRICHLET};
use crate::sparse::{conjugate_gradient, factor_hpd_with, HermitianSparse, LdlFactor, Ordering, SymbolicLdl};

use super::local::{ElementGram, LocalBlocks};
use super::{DpgError, Reaction};

/// Linear solver for the condensed systems.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LinearSolver {
    /// Sparse LDL^H factorization, reused for every right-hand side.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients per right-hand side.
    ConjugateGradient { tol: f64, max_iter: usize },
}

struct Shared {
    system: Arc<FeSystem>,
    reaction: Reaction,
    /// nu on each triangle.
    nu: Vec<f64>,
    grams: Vec<ElementGram>,
    /// Condensed index of each local DOF (trial then flux), DIRICHLET if none.
    local_dofs: Vec<usize>,
    n_local: usize,
    /// CSR value slot of each (row, col) local pair, row-major per element.
    scatter: Vec<usize>,
    pattern: HermitianSparse,
    ordering: Ordering,
    symbolic: OnceLock<Result<Arc<SymbolicLdl>, DpgError>>,
}

/// z-independent part of the DPG discretization: element Gram products, the
/// condensed sparsity pattern and its symbolic factorization. One assembler
/// serves every contour node.
#[derive(Clone)]
pub struct DpgAssembler {
    shared: Arc<Shared>,
}

impl std::fmt::Debug for DpgAssembler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DpgAssembler")
            .field("n_trial", &self.n_trial())
            .field("n_condensed", &self.n_condensed())
            .finish()
    }
}

impl DpgAssembler {
    pub fn new(system: Arc<FeSystem>, reaction: Reaction) -> Result<Self, DpgError> {
        Self::with_ordering(system, reaction, Ordering::default())
    }

    pub fn with_ordering(system: Arc<FeSystem>, reaction: Reaction, ordering: Ordering) -> Result<Self, DpgError> {
        let mesh = system.mesh().clone();
        let nt = mesh.num_triangles();
        let p = system.p();
        let nu_loc = system.local_trial_dim();
        let n_local = nu_loc + 3 * p;
        let n_trial = system.n_trial();
        let n = n_trial + system.n_flux();

        let grams = (0..nt)
            .into_par_iter()
            .map(|t| ElementGram::new(&LocalBlocks::new(&system, t)))
            .collect::<Result<Vec<_>, _>>()?;

        let mut local_dofs = Vec::with_capacity(nt * n_local);
        for t in 0..nt {
            local_dofs.extend_from_slice(system.trial_dofs(t));
            for i in 0..3 {
                for j in 0..p {
                    local_dofs.push(n_trial + system.flux_dof(t, i, j));
                }
            }
        }

        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in local_dofs.chunks(n_local) {
            for &r in dofs.iter().filter(|&&d| d != DIRICHLET) {
                rows[r].extend(dofs.iter().copied().filter(|&d| d != DIRICHLET));
            }
        }
        let pattern = HermitianSparse::from_pattern(n, n, rows);
        let mut scatter = Vec::with_capacity(nt * n_local * n_local);
        for dofs in local_dofs.chunks(n_local) {
            for &r in dofs {
                for &c in dofs {
                    scatter.push(if r == DIRICHLET || c == DIRICHLET {
                        DIRICHLET
                    } else {
                        pattern.position(r, c).expect("pattern covers element couplings")
                    });
                }
            }
        }
        let nu = mesh.tags().iter().map(|&tag| reaction.value(tag)).collect();
        Ok(Self {
            shared: Arc::new(Shared {
                system,
                reaction,
                nu,
                grams,
                local_dofs,
                n_local,
                scatter,
                pattern,
                ordering,
                symbolic: OnceLock::new(),
            }),
        })
    }

    pub fn system(&self) -> &Arc<FeSystem> {
        &self.shared.system
    }

    pub fn reaction(&self) -> &Reaction {
        &self.shared.reaction
    }

    pub fn n_trial(&self) -> usize {
        self.shared.system.n_trial()
    }

    /// dim L_h + dim Q_h.
    pub fn n_condensed(&self) -> usize {
        self.shared.pattern.nrows()
    }

    /// Symbolic LDL^H analysis of the condensed pattern, computed once.
    pub fn symbolic(&self) -> Result<Arc<SymbolicLdl>, DpgError> {
        self.shared
            .symbolic
            .get_or_init(|| {
                SymbolicLdl::analyze(&self.shared.pattern, self.shared.ordering)
                    .map(Arc::new)
                    .map_err(DpgError::from)
            })
            .clone()
    }

    /// B^H G^{-1} B over trial and flux DOFs for shift z.
    pub fn condensed_matrix(&self, z: Complex64) -> HermitianSparse {
        let sh = &*self.shared;
        let nl = sh.n_local;
        let mut values = vec![Complex64::new(0.0, 0.0); sh.pattern.nnz()];
        // element matrices in parallel, summed in element order
        const CHUNK: usize = 256;
        let nt = sh.grams.len();
        let mut buffer = vec![Complex64::new(0.0, 0.0); CHUNK * nl * nl];
        for start in (0..nt).step_by(CHUNK) {
            let end = (start + CHUNK).min(nt);
            buffer[..(end - start) * nl * nl]
                .par_chunks_mut(nl * nl)
                .enumerate()
                .for_each(|(k, out)| {
                    let t = start + k;
                    sh.grams[t].condensed(z + sh.nu[t], out);
                });
            for t in start..end {
                let local = &buffer[(t - start) * nl * nl..(t - start + 1) * nl * nl];
                let slots = &sh.scatter[t * nl * nl..(t + 1) * nl * nl];
                // local is column-major, slots row-major
                for r in 0..nl {
                    for c in 0..nl {
                        let slot = slots[r * nl + c];
                        if slot != DIRICHLET {
                            values[slot] += local[c * nl + r];
                        }
                    }
                }
            }
        }
        sh.pattern.with_values(values)
    }

    /// Condensed right-hand sides B^H G^{-1} (f, v) for trial coefficient
    /// columns f.
    pub fn condensed_rhs(&self, z: Complex64, f: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, DpgError> {
        let sh = &*self.shared;
        let n_trial = sh.system.n_trial();
        if f.nrows() != n_trial {
            return Err(DpgError::DimensionMismatch {
                expected: n_trial,
                got: f.nrows(),
            });
        }
        let nl = sh.n_local;
        let nu_loc = sh.system.local_trial_dim();
        let mut rhs = DMatrix::zeros(self.n_condensed(), f.ncols());
        let mut floc = vec![Complex64::new(0.0, 0.0); nu_loc];
        let mut out = vec![Complex64::new(0.0, 0.0); nl];
        for (t, gram) in sh.grams.iter().enumerate() {
            let dofs = &sh.local_dofs[t * nl..(t + 1) * nl];
            let a = z + sh.nu[t];
            for col in 0..f.ncols() {
                for (k, &d) in dofs[..nu_loc].iter().enumerate() {
                    floc[k] = if d == DIRICHLET { Complex64::new(0.0, 0.0) } else { f[(d, col)] };
                }
                gram.load(a, &floc, &mut out);
                for (k, &d) in dofs.iter().enumerate() {
                    if d != DIRICHLET {
                        rhs[(d, col)] += out[k];
                    }
                }
            }
        }
        Ok(rhs)
    }

    /// Builds the operator for shift z; the direct solver factors here.
    pub fn operator(&self, z: Complex64, solver: LinearSolver) -> Result<DpgOperator, DpgError> {
        let matrix = Arc::new(self.condensed_matrix(z));
        let backend = match solver {
            LinearSolver::Direct => Backend::Direct(factor_hpd_with(&self.symbolic()?, matrix)?),
            LinearSolver::ConjugateGradient { tol, max_iter } => Backend::Cg { matrix, tol, max_iter },
        };
        Ok(DpgOperator {
            z,
            assembler: self.clone(),
            backend,
        })
    }

    /// Element matrices of triangle t.
    pub fn local_blocks(&self, t: usize) -> LocalBlocks {
        LocalBlocks::new(&self.shared.system, t)
    }

    /// H^1(K) norms of the reconstructed test-space residual
    /// eps = G^{-1}(l - B x) on each element.
    pub fn eps_norms(&self, z: Complex64, f: &[Complex64], x: &[Complex64]) -> Result<Vec<f64>, DpgError> {
        let sh = &*self.shared;
        let nl = sh.n_local;
        let nu_loc = sh.system.local_trial_dim();
        (0..sh.grams.len())
            .into_par_iter()
            .map(|t| {
                let blocks = LocalBlocks::new(&sh.system, t);
                let q = blocks.whitened()?;
                let dofs = &sh.local_dofs[t * nl..(t + 1) * nl];
                let a = z + sh.nu[t];
                let pick = |v: &[Complex64], d: usize| if d == DIRICHLET { Complex64::new(0.0, 0.0) } else { v[d] };
                let mut norm2 = 0.0;
                for i in 0..q.nrows() {
                    // (P f - W x)_i with W = [a P - S, F]
                    let mut r = Complex64::new(0.0, 0.0);
                    for k in 0..nu_loc {
                        let d = dofs[k];
                        r += q[(i, k)] * (pick(f, d) - a * pick(x, d)) + q[(i, nu_loc + k)] * pick(x, d);
                    }
                    for k in nu_loc..nl {
                        r -= q[(i, nu_loc + k)] * x[dofs[k]];
                    }
                    norm2 += r.norm_sqr();
                }
                Ok(norm2.sqrt())
            })
            .collect()
    }
}

enum Backend {
    Direct(LdlFactor),
    Cg {
        matrix: Arc<HermitianSparse>,
        tol: f64,
        max_iter: usize,
    },
}

/// Discrete resolvent R_h(z) of the shifted operator z - A, A = -Laplace - nu.
pub struct DpgOperator {
    z: Complex64,
    assembler: DpgAssembler,
    backend: Backend,
}

impl std::fmt::Debug for DpgOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DpgOperator")
            .field("z", &self.z)
            .field("n_condensed", &self.assembler.n_condensed())
            .finish()
    }
}

/// One resolvent application: trial part u = R_h(z) f, interface fluxes q
/// and per-element residual norms.
#[derive(Debug, Clone)]
pub struct ResolventSolution {
    pub u: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub eps_norms: Vec<f64>,
}

/// Per-element indicators and their root sum of squares.
pub fn error_indicator(sol: &ResolventSolution) -> (Vec<f64>, f64) {
    let global = sol.eps_norms.iter().map(|e| e * e).sum::<f64>().sqrt();
    (sol.eps_norms.clone(), global)
}

impl DpgOperator {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn assembler(&self) -> &DpgAssembler {
        &self.assembler
    }

    /// The condensed Hermitian matrix.
    pub fn condensed(&self) -> &HermitianSparse {
        match &self.backend {
            Backend::Direct(f) => f.matrix(),
            Backend::Cg { matrix, .. } => matrix,
        }
    }

    /// Solves the condensed system for each right-hand side column.
    pub fn solve_condensed(&self, rhs: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, DpgError> {
        let n = self.assembler.n_condensed();
        if rhs.nrows() != n {
            return Err(DpgError::DimensionMismatch {
                expected: n,
                got: rhs.nrows(),
            });
        }
        let k = rhs.ncols();
        match &self.backend {
            Backend::Direct(factor) => Ok(DMatrix::from_vec(n, k, factor.solve(rhs.as_slice(), k))),
            Backend::Cg { matrix, tol, max_iter } => {
                let mut x = DMatrix::zeros(n, k);
                for c in 0..k {
                    let b: Vec<Complex64> = rhs.column(c).iter().copied().collect();
                    let out = conjugate_gradient(matrix, &b, *tol, *max_iter);
                    if !out.converged {
                        return Err(DpgError::CgNotConverged {
                            iterations: out.iterations,
                            residual: out.relative_residual,
                        });
                    }
                    x.column_mut(c).copy_from_slice(&out.solution);
                }
                Ok(x)
            }
        }
    }

    /// u-components of R_h(z) f for every column of f.
    pub fn apply_resolvent(&self, f: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, DpgError> {
        let x = self.solve_condensed(&self.assembler.condensed_rhs(self.z, f)?)?;
        Ok(x.rows(0, self.assembler.n_trial()).into_owned())
    }

    /// Full solutions (u, q and the element residual norms) per column.
    pub fn solve(&self, f: &DMatrix<Complex64>) -> Result<Vec<ResolventSolution>, DpgError> {
        let x = self.solve_condensed(&self.assembler.condensed_rhs(self.z, f)?)?;
        let nt = self.assembler.n_trial();
        (0..f.ncols())
            .map(|c| {
                let xc: Vec<Complex64> = x.column(c).iter().copied().collect();
                let fc: Vec<Complex64> = f.column(c).iter().copied().collect();
                let eps_norms = self.assembler.eps_norms(self.z, &fc, &xc)?;
                Ok(ResolventSolution {
                    u: xc[..nt].to_vec(),
                    q: xc[nt..].to_vec(),
                    eps_norms,
                })
            })
            .collect()
    }
}
