use crate::mesh::LOCAL_EDGES;

/// Number of degree-p Lagrange functions on a triangle.
pub fn lagrange_dim(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Multi-indices (barycentric numerators) of the equispaced degree-p nodes in
/// local order: the three vertices, then p - 1 nodes per local edge running
/// from its first to its second vertex, then interior nodes.
pub fn lagrange_nodes(p: usize) -> Vec<[usize; 3]> {
    assert!(p >= 1);
    let mut nodes = Vec::with_capacity(lagrange_dim(p));
    for v in 0..3 {
        let mut a = [0; 3];
        a[v] = p;
        nodes.push(a);
    }
    for [va, vb] in LOCAL_EDGES {
        for k in 1..p {
            let mut a = [0; 3];
            a[va] = p - k;
            a[vb] = k;
            nodes.push(a);
        }
    }
    for i in 1..p {
        for j in 1..p - i {
            nodes.push([p - i - j, i, j]);
        }
    }
    nodes
}

/// Gradients of the barycentric coordinates in reference coordinates.
const BARY_GRAD: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// Silvester factor prod_{s<m} (p l - s)/(s + 1) and its derivative in l.
fn silvester(p: usize, m: usize, l: f64) -> (f64, f64) {
    let mut val = 1.0;
    let mut der = 0.0;
    for s in 0..m {
        let f = (p as f64 * l - s as f64) / (s + 1) as f64;
        let df = p as f64 / (s + 1) as f64;
        der = der * f + val * df;
        val *= f;
    }
    (val, der)
}

/// Values and reference-coordinate gradients of the degree-p Lagrange basis
/// at a point given in barycentric coordinates.
pub fn eval_trial_basis(p: usize, bary: [f64; 3]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let nodes = lagrange_nodes(p);
    let mut values = Vec::with_capacity(nodes.len());
    let mut grads = Vec::with_capacity(nodes.len());
    eval_with_nodes(p, &nodes, bary, &mut values, &mut grads);
    (values, grads)
}

pub(crate) fn eval_with_nodes(
    p: usize,
    nodes: &[[usize; 3]],
    bary: [f64; 3],
    values: &mut Vec<f64>,
    grads: &mut Vec<[f64; 2]>,
) {
    values.clear();
    grads.clear();
    // factor tables per barycentric coordinate and exponent
    let table: Vec<Vec<(f64, f64)>> = (0..3)
        .map(|c| (0..=p).map(|m| silvester(p, m, bary[c])).collect())
        .collect();
    for a in nodes {
        let f = [table[0][a[0]], table[1][a[1]], table[2][a[2]]];
        values.push(f[0].0 * f[1].0 * f[2].0);
        let mut g = [0.0; 2];
        for c in 0..3 {
            let others: f64 = (0..3).filter(|&d| d != c).map(|d| f[d].0).product();
            g[0] += f[c].1 * others * BARY_GRAD[c][0];
            g[1] += f[c].1 * others * BARY_GRAD[c][1];
        }
        grads.push(g);
    }
}

/// Normal-trace basis on an edge: Legendre polynomials P_j(2t - 1),
/// j < p, in the edge parameter t in [0, 1] running from the lower to the
/// higher global vertex index.
pub fn eval_flux_basis(p: usize, t: f64) -> Vec<f64> {
    let x = 2.0 * t - 1.0;
    let mut out = Vec::with_capacity(p);
    let (mut p0, mut p1) = (1.0, x);
    for j in 0..p {
        match j {
            0 => out.push(1.0),
            1 => out.push(x),
            _ => {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
                out.push(p2);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        for p in 1..=6 {
            assert_eq!(lagrange_nodes(p).len(), lagrange_dim(p));
        }
    }

    #[test]
    fn p1_kronecker_at_vertices() {
        let pts = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for (i, b) in pts.iter().enumerate() {
            let (v, _) = eval_trial_basis(1, *b);
            for (j, vj) in v.iter().enumerate() {
                assert_eq!(*vj, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn nodal_property_all_degrees() {
        for p in 1..=6 {
            let nodes = lagrange_nodes(p);
            for (i, a) in nodes.iter().enumerate() {
                let b = a.map(|k| k as f64 / p as f64);
                let (v, _) = eval_trial_basis(p, b);
                for (j, vj) in v.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((vj - e).abs() < 1e-12, "p={p} node {i} fn {j}: {vj}");
                }
            }
        }
    }

    #[test]
    fn p2_edge_midpoint() {
        // local edge 0 runs between vertices 1 and 2; its node is local dof 3
        let (v, _) = eval_trial_basis(2, [0.0, 0.5, 0.5]);
        for (j, vj) in v.iter().enumerate() {
            assert!((vj - if j == 3 { 1.0 } else { 0.0 }).abs() < 1e-15);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (x, y) = (0.21, 0.33);
        let h = 1e-6;
        for p in 1..=5 {
            let (_, g) = eval_trial_basis(p, [1.0 - x - y, x, y]);
            let (vp, _) = eval_trial_basis(p, [1.0 - x - h - y, x + h, y]);
            let (vm, _) = eval_trial_basis(p, [1.0 - x + h - y, x - h, y]);
            let (wp, _) = eval_trial_basis(p, [1.0 - x - y - h, x, y + h]);
            let (wm, _) = eval_trial_basis(p, [1.0 - x - y + h, x, y - h]);
            for j in 0..g.len() {
                assert!((g[j][0] - (vp[j] - vm[j]) / (2.0 * h)).abs() < 1e-6);
                assert!((g[j][1] - (wp[j] - wm[j]) / (2.0 * h)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn legendre_values() {
        assert_eq!(eval_flux_basis(1, 0.3), vec![1.0]);
        assert_eq!(eval_flux_basis(2, 0.0), vec![1.0, -1.0]);
        let v = eval_flux_basis(4, 0.75);
        let x: f64 = 0.5;
        assert!((v[2] - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        assert!((v[3] - 0.5 * (5.0 * x.powi(3) - 3.0 * x)).abs() < 1e-15);
    }
}
