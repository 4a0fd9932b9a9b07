use super::{Mesh, MeshError};

fn snap(p: [f64; 2], r: f64) -> [f64; 2] {
    let norm = p[0].hypot(p[1]);
    [p[0] * r / norm, p[1] * r / norm]
}

/// Quadrisection through edge midpoints. Children inherit the parent tag.
/// On disc meshes, midpoints of boundary edges are moved onto the unit circle
/// and midpoints of interface edges onto the interface circle.
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh, MeshError> {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices().to_vec();
    vertices.reserve(mesh.num_edges());
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let mut mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
        if let Some(disc) = mesh.disc_geometry() {
            if mesh.is_boundary_edge(e) {
                mid = snap(mid, 1.0);
            } else if let (t0, Some(t1)) = mesh.edge_owners()[e] {
                if mesh.tags()[t0] != mesh.tags()[t1] {
                    mid = snap(mid, disc.r_interface);
                }
            }
        }
        vertices.push(mid);
    }
    let mut tris = Vec::with_capacity(4 * mesh.num_triangles());
    let mut tags = Vec::with_capacity(4 * mesh.num_triangles());
    for (t, (&[v0, v1, v2], te)) in mesh.triangles().iter().zip(mesh.triangle_edges()).enumerate() {
        let [m0, m1, m2] = te.map(|e| nv + e);
        tris.extend([[v0, m2, m1], [v1, m0, m2], [v2, m1, m0], [m0, m1, m2]]);
        tags.extend([mesh.tags()[t]; 4]);
    }
    let refined = Mesh::new(vertices, tris, tags)?;
    Ok(match mesh.disc_geometry() {
        Some(d) => refined.with_disc(d),
        None => refined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_disc_fiber, make_lshape, make_unit_square};

    #[test]
    fn square_refinement_counts() {
        let m = refine_uniform(&make_unit_square(1).unwrap()).unwrap();
        assert_eq!((m.num_triangles(), m.num_vertices()), (8, 9));
        m.validate().unwrap();
    }

    #[test]
    fn lshape_h_halved_and_area_kept() {
        let m = make_lshape(1).unwrap();
        let r = refine_uniform(&m).unwrap();
        assert_eq!(r.h_max(), m.h_max() / 2.0);
        assert!((r.total_area() - 3.0).abs() < 3e-12);
        assert_eq!(r.num_vertices(), m.num_vertices() + m.num_edges());
    }

    #[test]
    fn tags_inherited_and_snapping() {
        let m = make_disc_fiber(32, 0.25, 2.0).unwrap();
        let r = refine_uniform(&m).unwrap();
        r.validate().unwrap();
        for t in 0..r.num_triangles() {
            assert_eq!(r.tags()[t], m.tags()[t / 4]);
        }
        for e in r.interface_edges() {
            for v in r.edges()[e] {
                let [x, y] = r.vertices()[v];
                assert!((x.hypot(y) - 0.25).abs() < 1e-12);
            }
        }
        for e in r.boundary_edges() {
            for v in r.edges()[e] {
                let [x, y] = r.vertices()[v];
                assert!((x.hypot(y) - 1.0).abs() < 1e-12);
            }
        }
    }
}
