//! Plain ASCII mesh files with 0-based indices:
//!
//! ```text
//! V T B
//! x y            (V lines)
//! i j k tag      (T lines)
//! i j            (B lines, boundary edges)
//! ```

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Mesh, MeshError};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<(), MeshError> {
    let boundary: Vec<usize> = mesh.boundary_edges().collect();
    writeln!(out, "{} {} {}", mesh.num_vertices(), mesh.num_triangles(), boundary.len())?;
    for [x, y] in mesh.vertices() {
        writeln!(out, "{x:e} {y:e}")?;
    }
    for (tri, tag) in mesh.triangles().iter().zip(mesh.tags()) {
        writeln!(out, "{} {} {} {tag}", tri[0], tri[1], tri[2])?;
    }
    for e in boundary {
        let [a, b] = mesh.edges()[e];
        writeln!(out, "{a} {b}")?;
    }
    Ok(())
}

pub fn read_mesh_file(path: &Path) -> Result<Mesh, MeshError> {
    read_mesh(std::fs::File::open(path)?)
}

/// Parses a mesh and checks that the listed boundary edges are exactly the
/// edges owned by a single triangle.
pub fn read_mesh<R: Read>(input: R) -> Result<Mesh, MeshError> {
    let mut lines = BufReader::new(input)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut next = |what: &str| -> Result<(usize, Vec<String>), MeshError> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l.split_whitespace().map(str::to_owned).collect())),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(MeshError::Parse {
                line: 0,
                msg: format!("unexpected end of file while reading {what}"),
            }),
        }
    };
    fn field<T: std::str::FromStr>(line: usize, tokens: &[String], k: usize, expect: usize) -> Result<T, MeshError> {
        if tokens.len() != expect {
            return Err(MeshError::Parse {
                line,
                msg: format!("expected {expect} fields, found {}", tokens.len()),
            });
        }
        tokens[k].parse().map_err(|_| MeshError::Parse {
            line,
            msg: format!("cannot parse {:?}", tokens[k]),
        })
    }

    let (n, head) = next("header")?;
    let nv: usize = field(n, &head, 0, 3)?;
    let nt: usize = field(n, &head, 1, 3)?;
    let nb: usize = field(n, &head, 2, 3)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, t) = next("vertices")?;
        vertices.push([field(n, &t, 0, 2)?, field(n, &t, 1, 2)?]);
    }
    let mut tris = Vec::with_capacity(nt);
    let mut tags = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, t) = next("triangles")?;
        tris.push([field(n, &t, 0, 4)?, field(n, &t, 1, 4)?, field(n, &t, 2, 4)?]);
        tags.push(field(n, &t, 3, 4)?);
    }
    let mut listed = HashSet::with_capacity(nb);
    for _ in 0..nb {
        let (n, t) = next("boundary edges")?;
        let (a, b): (usize, usize) = (field(n, &t, 0, 2)?, field(n, &t, 1, 2)?);
        listed.insert([a.min(b), a.max(b)]);
    }

    let mesh = Mesh::new(vertices, tris, tags)?;
    let actual: HashSet<[usize; 2]> = mesh.boundary_edges().map(|e| mesh.edges()[e]).collect();
    if let Some(e) = listed.difference(&actual).next() {
        return Err(MeshError::BoundaryMismatch(format!("edge {e:?} is not a boundary edge")));
    }
    if let Some(e) = actual.difference(&listed).next() {
        return Err(MeshError::BoundaryMismatch(format!("boundary edge {e:?} is not listed")));
    }
    Ok(mesh)
}
