//! Reference bases, quadrature and the global layout of the trial, flux and
//! test spaces.

mod basis;
mod quadrature;
mod reference;

pub use basis::{eval_flux_basis, eval_trial_basis, lagrange_dim, lagrange_nodes};
pub use quadrature::{gauss_legendre, quadrature, QuadratureRule, MAX_QUADRATURE_DEGREE};
pub use reference::{contract_metric, ReferenceTables};

use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::mesh::{Mesh, LOCAL_EDGES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementsError {
    #[error("invalid degrees p = {p}, dp = {dp}; both must be at least 1")]
    InvalidDegree { p: usize, dp: usize },
    #[error("no quadrature rule of degree {degree} (maximum {max})")]
    UnsupportedQuadrature { degree: usize, max: usize },
}

/// Marks a local trial function whose global DOF is a Dirichlet DOF.
pub const DIRICHLET: usize = usize::MAX;

/// Affine map x = x0 + J xi from the reference triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: [f64; 2],
    /// Columns are v1 - v0 and v2 - v0.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    /// J^{-1} J^{-T}, so that grad u . grad v = g_u^T metric g_v in reference
    /// gradients.
    pub metric: [[f64; 2]; 2],
}

impl ElementGeometry {
    pub fn new(v: [[f64; 2]; 3]) -> Self {
        let j = [[v[1][0] - v[0][0], v[2][0] - v[0][0]], [v[1][1] - v[0][1], v[2][1] - v[0][1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        let mut metric = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                metric[a][b] = inv[a][0] * inv[b][0] + inv[a][1] * inv[b][1];
            }
        }
        Self {
            origin: v[0],
            jacobian: j,
            det,
            metric,
        }
    }

    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jacobian[0][0] * xi[0] + self.jacobian[0][1] * xi[1],
            self.origin[1] + self.jacobian[1][0] * xi[0] + self.jacobian[1][1] * xi[1],
        ]
    }
}

/// Degree-p trial space with Dirichlet DOFs removed, p flux DOFs per edge and
/// element-local test blocks of degree p + dp.
#[derive(Debug, Clone)]
pub struct FeSystem {
    mesh: Arc<Mesh>,
    p: usize,
    dp: usize,
    n_trial: usize,
    trial_map: Vec<usize>,
    trial_points: Vec<[f64; 2]>,
    tables: Arc<ReferenceTables>,
}

pub fn build_system(mesh: Arc<Mesh>, p: usize, dp: usize) -> Result<FeSystem, ElementsError> {
    FeSystem::new(mesh, p, dp)
}

impl FeSystem {
    pub fn new(mesh: Arc<Mesh>, p: usize, dp: usize) -> Result<Self, ElementsError> {
        let tables = Arc::new(ReferenceTables::new(p, dp)?);
        let on_boundary = mesh.boundary_vertices();
        let verts = mesh.vertices();
        let mut trial_points = Vec::new();

        let mut vertex_dof = vec![DIRICHLET; mesh.num_vertices()];
        for (v, &b) in on_boundary.iter().enumerate() {
            if !b {
                vertex_dof[v] = trial_points.len();
                trial_points.push(verts[v]);
            }
        }
        // first DOF of each interior edge; nodes run from the lower vertex
        let mut edge_dof = vec![DIRICHLET; mesh.num_edges()];
        for (e, &[lo, hi]) in mesh.edges().iter().enumerate() {
            if mesh.is_boundary_edge(e) || p < 2 {
                continue;
            }
            edge_dof[e] = trial_points.len();
            for k in 1..p {
                let s = k as f64 / p as f64;
                trial_points.push([
                    verts[lo][0] + s * (verts[hi][0] - verts[lo][0]),
                    verts[lo][1] + s * (verts[hi][1] - verts[lo][1]),
                ]);
            }
        }
        let nodes = lagrange_nodes(p);
        let n_local = nodes.len();
        let mut trial_map = Vec::with_capacity(mesh.num_triangles() * n_local);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for &v in tri {
                trial_map.push(vertex_dof[v]);
            }
            for (i, &[a, b]) in LOCAL_EDGES.iter().enumerate() {
                let e = mesh.triangle_edges()[t][i];
                let forward = tri[a] < tri[b];
                for k in 1..p {
                    trial_map.push(if edge_dof[e] == DIRICHLET {
                        DIRICHLET
                    } else {
                        edge_dof[e] + if forward { k - 1 } else { p - k - 1 }
                    });
                }
            }
            let geo = ElementGeometry::new(tri.map(|v| verts[v]));
            for a in &nodes[3 * p..] {
                trial_map.push(trial_points.len());
                trial_points.push(geo.map([a[1] as f64 / p as f64, a[2] as f64 / p as f64]));
            }
            debug_assert_eq!(trial_map.len(), (t + 1) * n_local);
        }
        Ok(Self {
            n_trial: trial_points.len(),
            mesh,
            p,
            dp,
            trial_map,
            trial_points,
            tables,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dp(&self) -> usize {
        self.dp
    }

    pub fn tables(&self) -> &ReferenceTables {
        &self.tables
    }

    /// dim L_h.
    pub fn n_trial(&self) -> usize {
        self.n_trial
    }

    /// dim Q_h.
    pub fn n_flux(&self) -> usize {
        self.p * self.mesh.num_edges()
    }

    pub fn test_block_dim(&self) -> usize {
        lagrange_dim(self.p + self.dp)
    }

    pub fn n_test(&self) -> usize {
        self.test_block_dim() * self.mesh.num_triangles()
    }

    pub fn local_trial_dim(&self) -> usize {
        lagrange_dim(self.p)
    }

    /// Global trial DOFs of triangle t in local order; [`DIRICHLET`] marks
    /// eliminated boundary DOFs.
    pub fn trial_dofs(&self, t: usize) -> &[usize] {
        let n = self.local_trial_dim();
        &self.trial_map[t * n..(t + 1) * n]
    }

    /// Flux DOF (in 0..n_flux) of Legendre function j on local edge i of t.
    pub fn flux_dof(&self, t: usize, i: usize, j: usize) -> usize {
        self.mesh.triangle_edges()[t][i] * self.p + j
    }

    /// Whether local edge i of t runs from the lower to the higher global
    /// vertex. If so, the outward normal equals the global edge normal.
    pub fn edge_forward(&self, t: usize, i: usize) -> bool {
        let tri = self.mesh.triangles()[t];
        let [a, b] = LOCAL_EDGES[i];
        tri[a] < tri[b]
    }

    /// Physical coordinates of every trial DOF node.
    pub fn trial_points(&self) -> &[[f64; 2]] {
        &self.trial_points
    }

    pub fn geometry(&self, t: usize) -> ElementGeometry {
        let tri = self.mesh.triangles()[t];
        ElementGeometry::new(tri.map(|v| self.mesh.vertices()[v]))
    }

    /// Element trial mass and stiffness matrices (local order, Dirichlet
    /// DOFs included).
    pub fn trial_element_matrices(&self, t: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let g = self.geometry(t);
        let jac = g.det.abs();
        let mass = &self.tables.trial_mass * jac;
        let stiff = contract_metric(&g.metric, &self.tables.trial_grad) * jac;
        (mass, stiff)
    }

    /// Flux-to-test coupling on triangle t: the (3p x test) matrix of
    /// sigma |e| int_e P_j v_k, with sigma = +1 when the outward normal is the
    /// global edge normal.
    pub fn flux_trace_matrix(&self, t: usize) -> DMatrix<f64> {
        let p = self.p;
        let nv = self.test_block_dim();
        let tri = self.mesh.triangles()[t];
        let verts = self.mesh.vertices();
        let mut out = DMatrix::zeros(3 * p, nv);
        for (i, &[a, b]) in LOCAL_EDGES.iter().enumerate() {
            let forward = tri[a] < tri[b];
            let pa = verts[tri[a]];
            let pb = verts[tri[b]];
            let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            let scale = if forward { len } else { -len };
            let table = &self.tables.edge_trace[i][usize::from(!forward)];
            out.rows_mut(i * p, p).copy_from(&(table * scale));
        }
        out
    }
}
