//! Wavefront OBJ export of tetrahedra and convex cells.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geom::{ConvexCell, Tetrahedron, Vec3};

fn vertex_line(out: &mut String, p: Vec3) {
    writeln!(out, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z).unwrap();
}

/// Vertices merged within `dedup_tol` (first occurrence wins), then four outward-facing
/// triangles per tetrahedron. Indices are 1-based.
pub fn export_obj(tetrahedra: &[Tetrahedron], dedup_tol: f64) -> String {
    assert!(dedup_tol >= 0.0, "dedup_tol must be non-negative");
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut index = |p: Vec3| -> usize {
        match vertices.iter().position(|q| q.distance(p) <= dedup_tol) {
            Some(i) => i,
            None => {
                vertices.push(p);
                vertices.len() - 1
            }
        }
    };
    let mut faces = Vec::with_capacity(4 * tetrahedra.len());
    for t in tetrahedra {
        let ids = t.v.map(&mut index);
        for (a, b, c, opp) in [(1, 2, 3, 0), (0, 3, 2, 1), (0, 1, 3, 2), (0, 2, 1, 3)] {
            let n = (t.v[b] - t.v[a]).cross(t.v[c] - t.v[a]);
            let face = if n.dot(t.v[opp] - t.v[a]) > 0.0 { [ids[a], ids[c], ids[b]] } else { [ids[a], ids[b], ids[c]] };
            faces.push(face);
        }
    }
    let mut out = format!("# sodalite: {} tetrahedra, {} vertices\n", tetrahedra.len(), vertices.len());
    for &p in &vertices {
        vertex_line(&mut out, p);
    }
    for f in faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    out
}

/// Polygonal faces of a convex cell, oriented outward.
pub fn export_cell_obj(cell: &ConvexCell) -> String {
    let c = cell.centroid();
    let mut out = format!("# sodalite: convex cell, {} vertices, {} faces\n", cell.vertices.len(), cell.faces.len());
    for &p in &cell.vertices {
        vertex_line(&mut out, p);
    }
    for f in &cell.faces {
        let p: Vec<Vec3> = f.iter().map(|&i| cell.vertices[i]).collect();
        let n = (p[1] - p[0]).cross(p[2] - p[0]);
        let mut idx: Vec<usize> = f.clone();
        if n.dot(p[0] - c) < 0.0 {
            idx.reverse();
        }
        let line: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(out, "f {}", line.join(" ")).unwrap();
    }
    out
}

/// Vertex positions and 0-based face index lists of an OBJ text (other records ignored).
#[derive(Clone, Debug, PartialEq)]
pub struct ObjMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
}

pub fn parse_obj(text: &str) -> Result<ObjMesh> {
    let mut mesh = ObjMesh { vertices: Vec::new(), faces: Vec::new() };
    for (n, line) in text.lines().enumerate() {
        let loc = || format!("line {}", n + 1);
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xs: Vec<f64> = parts
                    .map(|s| s.parse::<f64>().map_err(|e| Error::parse(loc(), e.to_string())))
                    .collect::<Result<_>>()?;
                if xs.len() != 3 {
                    return Err(Error::parse(loc(), format!("expected 3 coordinates, found {}", xs.len())));
                }
                mesh.vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
            }
            Some("f") => {
                let mut face = Vec::new();
                for s in parts {
                    let head = s.split('/').next().unwrap_or(s);
                    let i: usize = head.parse().map_err(|_| Error::parse(loc(), format!("bad index {s:?}")))?;
                    if i == 0 || i > mesh.vertices.len() {
                        return Err(Error::parse(loc(), format!("index {i} out of range")));
                    }
                    face.push(i - 1);
                }
                if face.len() < 3 {
                    return Err(Error::parse(loc(), "face with fewer than 3 vertices"));
                }
                mesh.faces.push(face);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::ideal_sodalite;
    use crate::geom::{voronoi_cell, TETRA_EDGES};

    #[test]
    fn ideal_ring_counts() {
        let text = export_obj(&ideal_sodalite().ring.tetra, 1e-9);
        let v = text.lines().filter(|l| l.starts_with("v ")).count();
        let f = text.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!((v, f), (18, 24));
    }

    #[test]
    fn empty_list_is_only_a_header() {
        let text = export_obj(&[], 1e-9);
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with('#'));
    }

    #[test]
    fn round_trip_within_tolerance() {
        let ring = ideal_sodalite().ring;
        let mesh = parse_obj(&export_obj(&ring.tetra, 1e-9)).unwrap();
        for t in &ring.tetra {
            for p in t.v {
                assert!(mesh.vertices.iter().any(|q| q.distance(p) <= 1e-9));
            }
        }
        // every tetrahedron edge shows up as a face edge
        let edges: std::collections::BTreeSet<(usize, usize)> = mesh
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |i| (f[i].min(f[(i + 1) % 3]), f[i].max(f[(i + 1) % 3]))))
            .collect();
        assert_eq!(edges.len(), 6 * TETRA_EDGES.len());
    }

    #[test]
    fn faces_point_outward() {
        let t = ideal_sodalite().ring.tetra[0];
        let mesh = parse_obj(&export_obj(&[t], 0.0)).unwrap();
        let c = mesh.vertices.iter().copied().sum::<Vec3>() / 4.0;
        for f in &mesh.faces {
            let [a, b, d] = [0, 1, 2].map(|i| mesh.vertices[f[i]]);
            assert!((b - a).cross(d - a).dot(a - c) > 0.0);
        }
    }

    #[test]
    fn cell_export_parses() {
        let cell = voronoi_cell(&ideal_sodalite().lattice).unwrap();
        let mesh = parse_obj(&export_cell_obj(&cell)).unwrap();
        assert_eq!(mesh.vertices.len(), 24);
        assert_eq!(mesh.faces.len(), 14);
    }

    #[test]
    fn parse_errors_have_lines() {
        assert!(matches!(parse_obj("v 1 2\n"), Err(Error::Parse { ref location, .. }) if location == "line 1"));
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
    }
}
