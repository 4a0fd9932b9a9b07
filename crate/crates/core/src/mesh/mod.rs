//! Conforming triangular meshes of the benchmark domains.

mod generate;
mod io;
mod refine;

pub use generate::{make_disc_fiber, make_lshape, make_unit_square, CORE_TAG, CLADDING_TAG, DEFAULT_TAG};
pub use io::{read_mesh, read_mesh_file, write_mesh};
pub use refine::refine_uniform;

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("triangle {0} has non-positive signed area {1:e}")]
    Degenerate(usize, f64),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonConforming(usize, usize),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("boundary edge list does not match the mesh boundary: {0}")]
    BoundaryMismatch(String),
    #[error("mesh file parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Circles whose refined edges are snapped back onto the true curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscGeometry {
    /// Radius of the material interface; the outer boundary is the unit circle.
    pub r_interface: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    triangles: Vec<[usize; 3]>,
    tags: Vec<u32>,
    /// Vertex pairs (lo, hi) with lo < hi.
    edges: Vec<[usize; 2]>,
    edge_owners: Vec<(usize, Option<usize>)>,
    /// Local edge i of a triangle is opposite local vertex i.
    triangle_edges: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    disc: Option<DiscGeometry>,
}

/// Local edge i joins local vertices (i+1)%3 -> (i+2)%3.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

impl Mesh {
    /// Builds edge connectivity and validates orientation and conformity.
    /// Clockwise triangles are reoriented.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        tags: Vec<u32>,
    ) -> Result<Self, MeshError> {
        assert_eq!(triangles.len(), tags.len());
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::VertexOutOfRange(v));
            }
            let area = signed_area(&vertices, tri);
            if area < 0.0 {
                tri.swap(1, 2);
            } else if !(area > 0.0) {
                return Err(MeshError::Degenerate(t, area));
            }
        }
        let mut index: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        let mut edge_owners: Vec<(usize, Option<usize>)> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for (i, le) in LOCAL_EDGES.iter().enumerate() {
                let (a, b) = (tri[le[0]], tri[le[1]]);
                let key = [a.min(b), a.max(b)];
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_owners.push((t, None));
                    edges.len() - 1
                });
                if edge_owners[e].0 != t {
                    if edge_owners[e].1.is_some() {
                        return Err(MeshError::NonConforming(key[0], key[1]));
                    }
                    edge_owners[e].1 = Some(t);
                }
                te[i] = e;
            }
            triangle_edges.push(te);
        }
        let boundary = edge_owners.iter().map(|o| o.1.is_none()).collect();
        Ok(Self {
            vertices,
            triangles,
            tags,
            edges,
            edge_owners,
            triangle_edges,
            boundary,
            disc: None,
        })
    }

    pub(crate) fn with_disc(mut self, disc: DiscGeometry) -> Self {
        self.disc = Some(disc);
        self
    }

    pub fn disc_geometry(&self) -> Option<DiscGeometry> {
        self.disc
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn tags(&self) -> &[u32] {
        &self.tags
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_owners(&self) -> &[(usize, Option<usize>)] {
        &self.edge_owners
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary[e]
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.boundary[e])
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in self.boundary_edges() {
            on[self.edges[e][0]] = true;
            on[self.edges[e][1]] = true;
        }
        on
    }

    /// Edges separating triangles with different region tags.
    pub fn interface_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| match self.edge_owners[e] {
            (a, Some(b)) => self.tags[a] != self.tags[b],
            _ => false,
        })
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Longest edge of triangle t.
    pub fn diameter(&self, t: usize) -> f64 {
        let tri = &self.triangles[t];
        LOCAL_EDGES
            .iter()
            .map(|le| dist(self.vertices[tri[le[0]]], self.vertices[tri[le[1]]]))
            .fold(0.0, f64::max)
    }

    pub fn h_max(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// Largest diameter among triangles carrying `tag`.
    pub fn h_max_tagged(&self, tag: u32) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| self.tags[t] == tag)
            .map(|t| self.diameter(t))
            .fold(0.0, f64::max)
    }

    /// Distinct region tags in ascending order.
    pub fn region_tags(&self) -> Vec<u32> {
        let mut t = self.tags.clone();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let tri = &self.triangles[t];
        let mut c = [0.0; 2];
        for &v in tri {
            c[0] += self.vertices[v][0] / 3.0;
            c[1] += self.vertices[v][1] / 3.0;
        }
        c
    }

    /// Checks the structural invariants: positive areas, conformity and
    /// consistent boundary flags.
    pub fn validate(&self) -> Result<(), MeshError> {
        for t in 0..self.triangles.len() {
            let a = self.area(t);
            if !(a > 0.0) {
                return Err(MeshError::Degenerate(t, a));
            }
        }
        let mut uses = vec![0usize; self.edges.len()];
        for te in &self.triangle_edges {
            for &e in te {
                uses[e] += 1;
            }
        }
        for (e, &u) in uses.iter().enumerate() {
            let ok = match u {
                1 => self.boundary[e],
                2 => !self.boundary[e],
                _ => false,
            };
            if !ok {
                return Err(MeshError::NonConforming(self.edges[e][0], self.edges[e][1]));
            }
        }
        Ok(())
    }
}

pub(crate) fn signed_area(vertices: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    let [a, b, c] = tri.map(|v| vertices[v]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 2, 1]],
            vec![1],
        )
        .unwrap();
        assert!(m.area(0) > 0.0);
    }

    #[test]
    fn degenerate_rejected() {
        let err = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            vec![[0, 1, 2]],
            vec![1],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::Degenerate(0, _)));
    }

    #[test]
    fn three_triangles_on_an_edge_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]];
        let err = Mesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]], vec![1; 3]).unwrap_err();
        assert!(matches!(err, MeshError::NonConforming(0, 1)));
    }
}
