use serde::{Deserialize, Serialize};

use super::{det3, RigidMotion, Vec3};
use crate::error::{Error, Result};

/// The six vertex-index pairs of a tetrahedron.
pub const TETRA_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Four labeled vertices `v[0..4]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tetrahedron {
    pub v: [Vec3; 4],
}

impl Tetrahedron {
    pub fn new(v: [Vec3; 4]) -> Self {
        Tetrahedron { v }
    }

    /// Six times the signed volume; positive when `v1-v0, v2-v0, v3-v0` is right-handed.
    pub fn signed_volume6(&self) -> f64 {
        det3(self.v[1] - self.v[0], self.v[2] - self.v[0], self.v[3] - self.v[0])
    }

    pub fn edge_lengths(&self) -> [f64; 6] {
        TETRA_EDGES.map(|(i, j)| self.v[i].distance(self.v[j]))
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Tetrahedron {
        Tetrahedron { v: self.v.map(f) }
    }

    pub fn transformed(&self, m: &RigidMotion) -> Tetrahedron {
        self.map(|p| m.apply(p))
    }

    pub fn translated(&self, t: Vec3) -> Tetrahedron {
        self.map(|p| p + t)
    }

    /// Largest distance from a vertex of `self` to the nearest vertex of `other`.
    pub fn nearest_vertex_mismatch(&self, other: &Tetrahedron) -> f64 {
        self.v.iter().map(|p| other.v.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    }

    /// Largest index-wise vertex distance.
    pub fn max_vertex_distance(&self, other: &Tetrahedron) -> f64 {
        (0..4).map(|i| self.v[i].distance(other.v[i])).fold(0.0, f64::max)
    }
}

/// True iff all six edges have length `edge` within `tol`. Degenerate input
/// (coincident vertices) simply fails the length test.
pub fn is_regular_tetrahedron(t: &Tetrahedron, edge: f64, tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    t.edge_lengths().iter().all(|l| (l - edge).abs() <= tol)
}

pub fn barycenter(t: &Tetrahedron) -> Vec3 {
    (t.v[0] + t.v[1] + t.v[2] + t.v[3]) * 0.25
}

/// Center and radius of the sphere through the four vertices.
pub fn circumsphere(t: &Tetrahedron) -> Result<(Vec3, f64)> {
    let o = t.v[0];
    let a = t.v[1] - o;
    let b = t.v[2] - o;
    let c = t.v[3] - o;
    let det = det3(a, b, c);
    let scale = a.norm() * b.norm() * c.norm();
    if !(det.abs() > 1e-12 * scale) || scale == 0.0 {
        return Err(Error::DegenerateTetrahedron);
    }
    // Solve [a; b; c] x = 0.5 (|a|², |b|², |c|²) by Cramer's rule.
    let (ra, rb, rc) = (0.5 * a.norm_squared(), 0.5 * b.norm_squared(), 0.5 * c.norm_squared());
    let x = (b.cross(c) * ra + c.cross(a) * rb + a.cross(b) * rc) / det;
    let center = o + x;
    Ok((center, x.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{EDGE, SQRT2};
    use crate::framework::reference_tetrahedron;
    use proptest::prelude::*;

    fn unit_regular() -> Tetrahedron {
        // regular tetrahedron of edge 1 inscribed in a cube of side 1/√2
        let s = 1.0 / (2.0 * SQRT2);
        Tetrahedron::new([Vec3::new(s, s, s), Vec3::new(s, -s, -s), Vec3::new(-s, s, -s), Vec3::new(-s, -s, s)])
    }

    #[test]
    fn reference_tetrahedron_is_regular() {
        assert!(is_regular_tetrahedron(&reference_tetrahedron(), EDGE, 1e-9));
    }

    #[test]
    fn coincident_points_are_not_regular() {
        let t = Tetrahedron::new([Vec3::ZERO; 4]);
        assert!(!is_regular_tetrahedron(&t, EDGE, 1e-9));
        assert!(!is_regular_tetrahedron(&t, 1.0, 1e-9));
    }

    #[test]
    fn perturbation_beyond_tolerance_fails() {
        let mut t = reference_tetrahedron();
        t.v[0] += Vec3::new(1e-3, 0.0, 0.0);
        assert!(!is_regular_tetrahedron(&t, EDGE, 1e-6));
    }

    #[test]
    fn reference_barycenter() {
        let b = barycenter(&reference_tetrahedron());
        assert!((b - Vec3::new(1.0 / SQRT2, 0.0, SQRT2)).norm() < 1e-15);
        assert!(barycenter(&unit_regular()).norm() < 1e-15);
    }

    #[test]
    fn reference_circumsphere() {
        let t = reference_tetrahedron();
        let (c, r) = circumsphere(&t).unwrap();
        // independent route: distance from the barycenter to a vertex
        let b = barycenter(&t);
        assert!((c - b).norm() < 1e-14);
        assert!((r - t.v[0].distance(b)).abs() < 1e-14);
        assert!((r - 0.507_305_936_177_288_4).abs() < 1e-12);
        assert!((r - EDGE * (3.0f64 / 8.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn unit_regular_circumradius() {
        let (_, r) = circumsphere(&unit_regular()).unwrap();
        assert!((r - (3.0f64 / 8.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn coplanar_points_have_no_circumsphere() {
        let t = Tetrahedron::new([
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ]);
        assert!(matches!(circumsphere(&t), Err(Error::DegenerateTetrahedron)));
    }

    proptest! {
        #[test]
        fn barycenter_is_translation_equivariant(u in prop::array::uniform3(-5.0f64..5.0)) {
            let u = Vec3::from(u);
            let t = reference_tetrahedron();
            let d = barycenter(&t.translated(u)) - (barycenter(&t) + u);
            prop_assert!(d.norm() < 1e-13);
        }

        #[test]
        fn circumcenter_is_equidistant(pts in prop::array::uniform12(-3.0f64..3.0)) {
            let v = [0, 1, 2, 3].map(|i| Vec3::new(pts[3 * i], pts[3 * i + 1], pts[3 * i + 2]));
            let t = Tetrahedron::new(v);
            // keep reasonably conditioned samples only
            let e = t.edge_lengths();
            let min_e = e.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assume!(t.signed_volume6().abs() > 0.05 && min_e > 0.1);
            let (c, r) = circumsphere(&t).unwrap();
            prop_assume!(r < 50.0);
            for p in v {
                prop_assert!((p.distance(c) - r).abs() < 1e-10 * (1.0 + r));
            }
        }
    }
}
