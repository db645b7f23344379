//! Convex cells and lattice Voronoi cells by half-space clipping.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PeriodLattice, Vec3};
use crate::error::{Error, Result};

/// Vertices closer than this (model units) are merged.
pub const VERTEX_DEDUP_TOL: f64 = 1e-9;

/// Lattice points with generator coordinates in `[-SHELL, SHELL]³` contribute half-spaces.
pub const VORONOI_SHELL: i64 = 2;

/// A convex polyhedron with faces listed counter-clockwise as seen from outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexCell {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
}

/// Structural checks on a [`ConvexCell`].
#[derive(Clone, Debug, PartialEq)]
pub struct CellCheck {
    pub euler_characteristic: i64,
    pub max_planarity_defect: f64,
    /// Edges not shared by exactly two faces.
    pub bad_edges: usize,
}

impl CellCheck {
    pub fn is_valid(&self, planarity_tol: f64) -> bool {
        self.euler_characteristic == 2 && self.bad_edges == 0 && self.max_planarity_defect <= planarity_tol
    }
}

impl ConvexCell {
    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edge_face_counts().into_keys().collect()
    }

    fn edge_face_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for f in &self.faces {
            for k in 0..f.len() {
                let (a, b) = (f[k], f[(k + 1) % f.len()]);
                *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edges().iter().map(|&(i, j)| self.vertices[i].distance(self.vertices[j])).collect()
    }

    /// Number of faces with each vertex count.
    pub fn face_size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for f in &self.faces {
            *h.entry(f.len()).or_insert(0) += 1;
        }
        h
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().copied().sum::<Vec3>() / self.vertices.len() as f64
    }

    pub fn check(&self) -> CellCheck {
        let counts = self.edge_face_counts();
        let v = self.vertices.len() as i64;
        let e = counts.len() as i64;
        let f = self.faces.len() as i64;
        let bad_edges = counts.values().filter(|&&c| c != 2).count();
        let max_planarity_defect = self
            .faces
            .iter()
            .map(|f| planarity_defect(&f.iter().map(|&i| self.vertices[i]).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        CellCheck { euler_characteristic: v - e + f, max_planarity_defect, bad_edges }
    }

    /// Same cell with every vertex mapped through `f` (combinatorics unchanged).
    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> ConvexCell {
        ConvexCell { vertices: self.vertices.iter().map(|&p| f(p)).collect(), faces: self.faces.clone() }
    }
}

/// Largest distance of a polygon vertex from the polygon's best (Newell) plane.
pub fn planarity_defect(poly: &[Vec3]) -> f64 {
    if poly.len() < 4 {
        return 0.0;
    }
    let c = poly.iter().copied().sum::<Vec3>() / poly.len() as f64;
    let mut n = Vec3::ZERO;
    for k in 0..poly.len() {
        n += (poly[k] - c).cross(poly[(k + 1) % poly.len()] - c);
    }
    let Some(n) = n.try_normalize() else {
        return f64::INFINITY;
    };
    poly.iter().map(|p| (*p - c).dot(n).abs()).fold(0.0, f64::max)
}

struct Face {
    normal: Vec3,
    poly: Vec<Vec3>,
}

/// Cell of points at least as close to the origin as to any other lattice point.
pub fn voronoi_cell(l: &PeriodLattice) -> Result<ConvexCell> {
    if l.is_degenerate() {
        return Err(Error::DegenerateLattice {
            det: l.det(),
            threshold: super::lattice::DEGENERATE_REL * l.norm_product(),
        });
    }
    let bound = 2.0 * l.g.iter().map(|g| g.norm()).sum::<f64>();
    let mut faces = bounding_cube(bound);
    let scale = l.g.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let eps = 1e-12 * scale.max(1.0);
    for p in l.shell_points(VORONOI_SHELL) {
        let n = p.normalize();
        clip(&mut faces, n, 0.5 * p.norm(), eps);
    }
    Ok(assemble(&faces, VERTEX_DEDUP_TOL))
}

fn bounding_cube(b: f64) -> Vec<Face> {
    let mut faces = Vec::with_capacity(6);
    for axis in 0..3 {
        for s in [1.0, -1.0] {
            let mut n = [0.0; 3];
            n[axis] = s;
            let n = Vec3::from(n);
            let u = n.any_orthonormal();
            let w = n.cross(u);
            let c = n * b;
            let poly = vec![c + (u + w) * b, c + (w - u) * b, c - (u + w) * b, c + (u - w) * b];
            faces.push(Face { normal: n, poly });
        }
    }
    faces
}

/// Keeps `{x : n·x ≤ d}`; adds the cap face when the plane actually cuts.
fn clip(faces: &mut Vec<Face>, n: Vec3, d: f64, eps: f64) {
    let cuts = faces.iter().any(|f| f.poly.iter().any(|p| n.dot(*p) - d > eps));
    if !cuts {
        return;
    }
    let mut cap = Vec::new();
    for f in faces.iter_mut() {
        let m = f.poly.len();
        let mut out = Vec::with_capacity(m + 1);
        for k in 0..m {
            let a = f.poly[k];
            let b = f.poly[(k + 1) % m];
            let (sa, sb) = (n.dot(a) - d, n.dot(b) - d);
            if sa <= eps {
                out.push(a);
                if sa.abs() <= eps {
                    cap.push(a);
                }
            }
            if (sa < -eps && sb > eps) || (sa > eps && sb < -eps) {
                let t = sa / (sa - sb);
                let x = a.lerp(b, t);
                out.push(x);
                cap.push(x);
            }
        }
        f.poly = out;
    }
    faces.retain(|f| dedup_points(&f.poly, 1e-12).len() >= 3);
    let cap = dedup_points(&cap, 1e-12);
    if cap.len() >= 3 {
        faces.push(Face { normal: n, poly: order_ccw(cap, n) });
    }
}

fn dedup_points(pts: &[Vec3], tol: f64) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out.iter().any(|q| q.distance(*p) <= tol) {
            out.push(*p);
        }
    }
    out
}

fn order_ccw(pts: Vec<Vec3>, n: Vec3) -> Vec<Vec3> {
    let c = pts.iter().copied().sum::<Vec3>() / pts.len() as f64;
    let u = n.any_orthonormal();
    let w = n.cross(u);
    let mut keyed: Vec<(f64, Vec3)> = pts.into_iter().map(|p| ((p - c).dot(w).atan2((p - c).dot(u)), p)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, p)| p).collect()
}

fn assemble(faces: &[Face], tol: f64) -> ConvexCell {
    let mut verts: Vec<Vec3> = Vec::new();
    let mut raw_faces = Vec::new();
    for f in faces {
        let mut idx: Vec<usize> = Vec::new();
        for p in &f.poly {
            let i = match verts.iter().position(|q| q.distance(*p) <= tol) {
                Some(i) => i,
                None => {
                    verts.push(*p);
                    verts.len() - 1
                }
            };
            if idx.last() != Some(&i) && idx.first() != Some(&i) {
                idx.push(i);
            }
        }
        if idx.len() >= 3 {
            raw_faces.push((f.normal, idx));
        }
    }
    // canonical vertex order: lexicographic in (x, y, z)
    let mut order: Vec<usize> = (0..verts.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (verts[a], verts[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z))
    });
    let mut rank = vec![0; verts.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let vertices: Vec<Vec3> = order.iter().map(|&i| verts[i]).collect();
    let mut faces: Vec<Vec<usize>> = raw_faces
        .into_iter()
        .map(|(_, f)| {
            let f: Vec<usize> = f.iter().map(|&i| rank[i]).collect();
            let start = (0..f.len()).min_by_key(|&k| f[k]).unwrap();
            (0..f.len()).map(|k| f[(start + k) % f.len()]).collect()
        })
        .collect();
    faces.sort();
    ConvexCell { vertices, faces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::ideal_lattice;

    #[test]
    fn cubic_lattice_gives_a_cube() {
        let l = PeriodLattice::new([Vec3::E1 * 2.0, Vec3::E2 * 2.0, Vec3::E3 * 2.0]);
        let cell = voronoi_cell(&l).unwrap();
        assert_eq!(cell.vertices.len(), 8);
        assert_eq!(cell.faces.len(), 6);
        assert_eq!(cell.edges().len(), 12);
        for v in &cell.vertices {
            assert!((v.max_abs() - 1.0).abs() < 1e-12);
        }
        assert!(cell.check().is_valid(1e-9));
    }

    #[test]
    fn ideal_lattice_gives_kelvin_polyhedron() {
        let cell = voronoi_cell(&ideal_lattice()).unwrap();
        assert_eq!(cell.vertices.len(), 24);
        assert_eq!(cell.edges().len(), 36);
        let h = cell.face_size_histogram();
        assert_eq!(h.get(&6), Some(&8));
        assert_eq!(h.get(&4), Some(&6));
        assert_eq!(h.len(), 2);
        assert!(cell.check().is_valid(1e-9));
    }

    #[test]
    fn faces_point_outward() {
        let cell = voronoi_cell(&ideal_lattice()).unwrap();
        for f in &cell.faces {
            let p: Vec<Vec3> = f.iter().map(|&i| cell.vertices[i]).collect();
            let c = p.iter().copied().sum::<Vec3>() / p.len() as f64;
            let n = (p[1] - p[0]).cross(p[2] - p[1]);
            assert!(n.dot(c) > 0.0);
        }
    }

    #[test]
    fn skewed_lattice_cell_is_consistent() {
        let l = PeriodLattice::new([Vec3::new(1.0, 0.1, 0.0), Vec3::new(0.3, 1.1, -0.2), Vec3::new(0.1, 0.2, 0.9)]);
        let cell = voronoi_cell(&l).unwrap();
        assert!(cell.check().is_valid(1e-9));
        // the cell volume equals the lattice covolume: check via divergence theorem
        let mut vol = 0.0;
        for f in &cell.faces {
            let p0 = cell.vertices[f[0]];
            for k in 1..f.len() - 1 {
                vol += p0.dot(cell.vertices[f[k]].cross(cell.vertices[f[k + 1]])) / 6.0;
            }
        }
        assert!((vol - super::super::lattice_volume(&l)).abs() < 1e-9);
    }

    #[test]
    fn degenerate_lattice_is_rejected() {
        let l = PeriodLattice::new([Vec3::E1, Vec3::E2, Vec3::E1 + Vec3::E2]);
        assert!(matches!(voronoi_cell(&l), Err(Error::DegenerateLattice { .. })));
    }
}
