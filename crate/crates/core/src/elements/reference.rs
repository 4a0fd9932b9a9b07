use nalgebra::DMatrix;

use super::basis::{eval_flux_basis, eval_with_nodes, lagrange_dim, lagrange_nodes};
use super::quadrature::{gauss_legendre, quadrature};
use super::ElementsError;
use crate::mesh::LOCAL_EDGES;

/// Integrals of basis products on the reference triangle. Because the
/// elements are affine, every element matrix is a linear combination of
/// these with geometry-dependent coefficients.
#[derive(Debug, Clone)]
pub struct ReferenceTables {
    pub p: usize,
    pub dp: usize,
    /// Test x test mass.
    pub test_mass: DMatrix<f64>,
    /// Test x test derivative products: [a][b] holds int d_a v_i d_b v_j.
    pub test_grad: [[DMatrix<f64>; 2]; 2],
    /// Test x trial mass.
    pub mixed_mass: DMatrix<f64>,
    /// [a][b] holds int d_a v_i d_b u_j.
    pub mixed_grad: [[DMatrix<f64>; 2]; 2],
    /// Trial x trial mass and derivative products.
    pub trial_mass: DMatrix<f64>,
    pub trial_grad: [[DMatrix<f64>; 2]; 2],
    /// Edge traces: `edge_trace[i][flip]` is a (p x test) matrix with entries
    /// int_0^1 P_j(s) v_k dt along local edge i, parametrised by t from its
    /// first to its second vertex, where s = t (flip = 0) or s = 1 - t.
    pub edge_trace: [[DMatrix<f64>; 2]; 3],
}

struct Tabulated {
    values: Vec<Vec<f64>>,
    grads: Vec<Vec<[f64; 2]>>,
}

fn tabulate(p: usize, points: &[[f64; 3]]) -> Tabulated {
    let nodes = lagrange_nodes(p);
    let mut values = Vec::with_capacity(points.len());
    let mut grads = Vec::with_capacity(points.len());
    for &b in points {
        let (mut v, mut g) = (Vec::new(), Vec::new());
        eval_with_nodes(p, &nodes, b, &mut v, &mut g);
        values.push(v);
        grads.push(g);
    }
    Tabulated { values, grads }
}

fn products(rows: &Tabulated, cols: &Tabulated, weights: &[f64]) -> (DMatrix<f64>, [[DMatrix<f64>; 2]; 2]) {
    let (nr, nc) = (rows.values[0].len(), cols.values[0].len());
    let mut mass = DMatrix::zeros(nr, nc);
    let mut grad = [
        [DMatrix::zeros(nr, nc), DMatrix::zeros(nr, nc)],
        [DMatrix::zeros(nr, nc), DMatrix::zeros(nr, nc)],
    ];
    for (q, &w) in weights.iter().enumerate() {
        for i in 0..nr {
            let (vi, gi) = (rows.values[q][i] * w, rows.grads[q][i]);
            for j in 0..nc {
                let gj = cols.grads[q][j];
                mass[(i, j)] += vi * cols.values[q][j];
                for a in 0..2 {
                    for b in 0..2 {
                        grad[a][b][(i, j)] += w * gi[a] * gj[b];
                    }
                }
            }
        }
    }
    (mass, grad)
}

impl ReferenceTables {
    pub fn new(p: usize, dp: usize) -> Result<Self, ElementsError> {
        if p == 0 || dp == 0 {
            return Err(ElementsError::InvalidDegree { p, dp });
        }
        let q = p + dp;
        let rule = quadrature(2 * q + 2)?;
        let test = tabulate(q, &rule.points);
        let trial = tabulate(p, &rule.points);
        let (test_mass, test_grad) = products(&test, &test, &rule.weights);
        let (mixed_mass, mixed_grad) = products(&test, &trial, &rule.weights);
        let (trial_mass, trial_grad) = products(&trial, &trial, &rule.weights);

        // flux degree p - 1 times test degree q on each edge
        let (t, w) = gauss_legendre((p + q) / 2 + 1);
        let nv = lagrange_dim(q);
        let nodes = lagrange_nodes(q);
        let edge_trace = LOCAL_EDGES.map(|[va, vb]| {
            let mut tables = [DMatrix::zeros(p, nv), DMatrix::zeros(p, nv)];
            let (mut vals, mut grads) = (Vec::new(), Vec::new());
            for (&tk, &wk) in t.iter().zip(&w) {
                let mut b = [0.0; 3];
                b[va] = 1.0 - tk;
                b[vb] = tk;
                eval_with_nodes(q, &nodes, b, &mut vals, &mut grads);
                for (flip, table) in tables.iter_mut().enumerate() {
                    let s = if flip == 0 { tk } else { 1.0 - tk };
                    let leg = eval_flux_basis(p, s);
                    for j in 0..p {
                        for k in 0..nv {
                            table[(j, k)] += wk * leg[j] * vals[k];
                        }
                    }
                }
            }
            tables
        });

        Ok(Self {
            p,
            dp,
            test_mass,
            test_grad,
            mixed_mass,
            mixed_grad,
            trial_mass,
            trial_grad,
            edge_trace,
        })
    }

    pub fn test_dim(&self) -> usize {
        self.test_mass.nrows()
    }

    pub fn trial_dim(&self) -> usize {
        self.trial_mass.nrows()
    }
}

/// Combines reference derivative tables with the metric C = J^{-1} J^{-T}:
/// returns sum_ab C_ab grad[a][b] (not yet scaled by |det J|).
pub fn contract_metric(metric: &[[f64; 2]; 2], grad: &[[DMatrix<f64>; 2]; 2]) -> DMatrix<f64> {
    let mut out = &grad[0][0] * metric[0][0];
    out += &grad[0][1] * metric[0][1];
    out += &grad[1][0] * metric[1][0];
    out += &grad[1][1] * metric[1][1];
    out
}
