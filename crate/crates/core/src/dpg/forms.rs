use crate::elements::{FeSystem, DIRICHLET};
use crate::sparse::RealSparse;

use super::Reaction;

/// Real sparse matrices of the trial space: stiffness K, mass M and the
/// Ritz form a(u, v) = int grad u . grad v - nu u v.
#[derive(Debug, Clone)]
pub struct TrialForms {
    pub stiffness: RealSparse,
    pub mass: RealSparse,
    pub a: RealSparse,
}

pub fn assemble_trial_forms(system: &FeSystem, reaction: &Reaction) -> TrialForms {
    let n = system.n_trial();
    let mesh = system.mesh();
    let mut k_trip = Vec::new();
    let mut m_trip = Vec::new();
    let mut a_trip = Vec::new();
    for t in 0..mesh.num_triangles() {
        let (m, k) = system.trial_element_matrices(t);
        let nu = reaction.value(mesh.tags()[t]);
        let dofs = system.trial_dofs(t);
        for (i, &r) in dofs.iter().enumerate() {
            if r == DIRICHLET {
                continue;
            }
            for (j, &c) in dofs.iter().enumerate() {
                if c == DIRICHLET {
                    continue;
                }
                k_trip.push((r, c, k[(i, j)]));
                m_trip.push((r, c, m[(i, j)]));
                a_trip.push((r, c, k[(i, j)] - nu * m[(i, j)]));
            }
        }
    }
    let build = |trip: Vec<(usize, usize, f64)>| RealSparse::from_triplets(n, n, trip).expect("indices in range");
    TrialForms {
        stiffness: build(k_trip),
        mass: build(m_trip),
        a: build(a_trip),
    }
}
