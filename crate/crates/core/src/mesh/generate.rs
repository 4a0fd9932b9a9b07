use std::f64::consts::PI;

use super::{DiscGeometry, Mesh, MeshError};

pub const DEFAULT_TAG: u32 = 0;
pub const CORE_TAG: u32 = 1;
pub const CLADDING_TAG: u32 = 2;

/// Splits the square with lower-left vertex `ll` along its lower-left to
/// upper-right diagonal. The split is symmetric under x <-> y reflection.
fn push_square(tris: &mut Vec<[usize; 3]>, ll: usize, lr: usize, ur: usize, ul: usize) {
    tris.push([ll, lr, ur]);
    tris.push([ll, ur, ul]);
}

/// Structured mesh of (0,1)^2 with n x n squares.
pub fn make_unit_square(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("square subdivision count must be at least 1".into()));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            push_square(&mut tris, idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
        }
    }
    let tags = vec![DEFAULT_TAG; tris.len()];
    Mesh::new(vertices, tris, tags)
}

/// Structured mesh of (0,2)^2 minus [1,2]^2 with n squares per unit length.
pub fn make_lshape(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("L-shape subdivision count must be at least 1".into()));
    }
    let m = 2 * n;
    let removed = |i: usize, j: usize| i > n && j > n;
    let mut index = vec![usize::MAX; (m + 1) * (m + 1)];
    let mut vertices = Vec::new();
    for j in 0..=m {
        for i in 0..=m {
            if !removed(i, j) {
                index[j * (m + 1) + i] = vertices.len();
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
    }
    let idx = |i: usize, j: usize| index[j * (m + 1) + i];
    let mut tris = Vec::with_capacity(6 * n * n);
    for j in 0..m {
        for i in 0..m {
            if i >= n && j >= n {
                continue;
            }
            push_square(&mut tris, idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
        }
    }
    let tags = vec![DEFAULT_TAG; tris.len()];
    Mesh::new(vertices, tris, tags)
}

/// Largest of 8, 4, 2, 1 dividing `n`; ring point counts are kept multiples
/// of it so the mesh is invariant under rotation by 2*pi/S.
fn sector_symmetry(n: usize) -> usize {
    [8, 4, 2, 1].into_iter().find(|&s| n.is_multiple_of(s)).unwrap()
}

fn ring_count(circumference: f64, h: f64, s: usize) -> usize {
    let k = (circumference / h / s as f64).round().max(1.0) as usize;
    k * s
}

fn push_ring(vertices: &mut Vec<[f64; 2]>, r: f64, count: usize) -> Vec<usize> {
    (0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            vertices.push([r * t.cos(), r * t.sin()]);
            vertices.len() - 1
        })
        .collect()
}

/// Triangulates the strip between two concentric rings by walking both in
/// angle order. Angles are compared as exact integer fractions so the
/// pattern repeats in every symmetry sector.
fn stitch(tris: &mut Vec<[usize; 3]>, tags: &mut Vec<u32>, inner: &[usize], outer: &[usize], tag: u32) {
    let (na, nb) = (inner.len(), outer.len());
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let advance_inner = j == nb || (i < na && (i + 1) * nb <= (j + 1) * na);
        if advance_inner {
            tris.push([inner[i % na], inner[(i + 1) % na], outer[j % nb]]);
            i += 1;
        } else {
            tris.push([inner[i % na], outer[(j + 1) % nb], outer[j % nb]]);
            j += 1;
        }
        tags.push(tag);
    }
}

/// Straight-edged triangulation of the unit disc with a material interface
/// on the circle r = `r_interface`. Triangles inside are tagged
/// [`CORE_TAG`], outside [`CLADDING_TAG`]. Element size is 2*pi/n_boundary
/// at the outer circle and smaller by `grading` in the core, with a linear
/// transition across the cladding.
pub fn make_disc_fiber(n_boundary: usize, r_interface: f64, grading: f64) -> Result<Mesh, MeshError> {
    if n_boundary < 16 {
        return Err(MeshError::InvalidParameter(format!(
            "n_boundary must be at least 16, got {n_boundary}"
        )));
    }
    if !(r_interface > 0.0 && r_interface < 1.0) {
        return Err(MeshError::InvalidParameter(format!(
            "interface radius must lie in (0, 1), got {r_interface}"
        )));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(MeshError::InvalidParameter(format!("grading must be >= 1, got {grading}")));
    }
    let s = sector_symmetry(n_boundary);
    let h_out = 2.0 * PI / n_boundary as f64;
    let h_core = h_out / grading;

    let mut vertices = vec![[0.0, 0.0]];
    let mut tris = Vec::new();
    let mut tags = Vec::new();

    // core rings at equal spacing, coarsening towards the centre
    let core_rings = ((r_interface / h_core).round() as usize).max(1);
    let mut prev: Option<Vec<usize>> = None;
    for j in 1..=core_rings {
        let r = if j == core_rings {
            r_interface
        } else {
            r_interface * j as f64 / core_rings as f64
        };
        let ring = push_ring(&mut vertices, r, ring_count(2.0 * PI * r, h_core, s));
        match &prev {
            None => {
                for k in 0..ring.len() {
                    tris.push([0, ring[k], ring[(k + 1) % ring.len()]]);
                    tags.push(CORE_TAG);
                }
            }
            Some(p) => stitch(&mut tris, &mut tags, p, &ring, CORE_TAG),
        }
        prev = Some(ring);
    }

    // cladding rings equidistributed in the metric dr / h(r)
    let slope = (h_out - h_core) / (1.0 - r_interface);
    let h_at = |r: f64| h_core + slope * (r - r_interface);
    let stretch = |r: f64| {
        if slope.abs() < 1e-14 {
            (r - r_interface) / h_core
        } else {
            (h_at(r) / h_core).ln() / slope
        }
    };
    let total = stretch(1.0);
    let clad_rings = (total.round() as usize).max(1);
    for j in 1..=clad_rings {
        let (r, count) = if j == clad_rings {
            (1.0, n_boundary)
        } else {
            let t = total * j as f64 / clad_rings as f64;
            let r = if slope.abs() < 1e-14 {
                r_interface + t * h_core
            } else {
                r_interface + h_core * ((slope * t).exp() - 1.0) / slope
            };
            (r, ring_count(2.0 * PI * r, h_at(r), s))
        };
        let ring = push_ring(&mut vertices, r, count);
        stitch(&mut tris, &mut tags, prev.as_ref().unwrap(), &ring, CLADDING_TAG);
        prev = Some(ring);
    }

    Ok(Mesh::new(vertices, tris, tags)?.with_disc(DiscGeometry { r_interface }))
}
