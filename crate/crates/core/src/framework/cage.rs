use std::sync::OnceLock;

use super::ideal::{ideal_lattice, ideal_sodalite};
use super::ring::{PeriodicPlacement, RingLabel};
use super::validate::validate_placement;
use crate::consts::SOLVER_TOL;
use crate::error::{Error, Result};
use crate::geom::{barycenter, voronoi_cell, ConvexCell, Tetrahedron};

/// A cage member: ring tetrahedron `label` translated by the lattice vector with coefficients `shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CageMember {
    pub label: RingLabel,
    pub shift: [i64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SodaliteCage {
    pub members: Vec<CageMember>,
    pub tetrahedra: Vec<Tetrahedron>,
    /// Hull of the member barycenters. Vertex `i` is the barycenter of member `i`.
    pub hull: ConvexCell,
}

impl SodaliteCage {
    /// Sorted pairwise barycenter distances: a congruence fingerprint of the cage.
    pub fn distance_spectrum(&self) -> Vec<f64> {
        let b = &self.hull.vertices;
        let mut d = Vec::with_capacity(b.len() * (b.len() - 1) / 2);
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                d.push(b[i].distance(b[j]));
            }
        }
        d.sort_by(f64::total_cmp);
        d
    }
}

struct CageTemplate {
    members: Vec<CageMember>,
    faces: Vec<Vec<usize>>,
}

/// Which translated ring tetrahedra sit at the vertices of the Voronoi cell at the origin,
/// read off the ideal placement. Deformed placements keep this combinatorics.
fn template() -> &'static CageTemplate {
    static T: OnceLock<CageTemplate> = OnceLock::new();
    T.get_or_init(|| {
        let p = ideal_sodalite();
        let cell = voronoi_cell(&ideal_lattice()).expect("ideal lattice is non-degenerate");
        let mut members = Vec::with_capacity(cell.vertices.len());
        for v in &cell.vertices {
            let m = find_member(&p, *v).expect("every Kelvin vertex is a tetrahedron barycenter");
            members.push(m);
        }
        CageTemplate { members, faces: cell.faces }
    })
}

fn find_member(p: &PeriodicPlacement, target: crate::geom::Vec3) -> Option<CageMember> {
    for label in RingLabel::RING_ORDER {
        let b = barycenter(p.ring.tet(label));
        for i in -2..=2 {
            for j in -2..=2 {
                for k in -2..=2 {
                    if (b + p.lattice.point([i, j, k])).distance(target) <= 1e-9 {
                        return Some(CageMember { label, shift: [i, j, k] });
                    }
                }
            }
        }
    }
    None
}

/// The 24 tetrahedra around the cell at the origin, plus the hull of their barycenters.
pub fn sodalite_cage(p: &PeriodicPlacement) -> Result<SodaliteCage> {
    let report = validate_placement(p, SOLVER_TOL);
    if !report.passed() {
        return Err(Error::InvalidPlacement(report.to_string()));
    }
    let t = template();
    let tetrahedra: Vec<Tetrahedron> =
        t.members.iter().map(|m| p.ring.tet(m.label).translated(p.lattice.point(m.shift))).collect();
    let hull = ConvexCell { vertices: tetrahedra.iter().map(barycenter).collect(), faces: t.faces.clone() };
    Ok(SodaliteCage { members: t.members.clone(), tetrahedra, hull })
}

/// Ring tetrahedra translated by every lattice combination with coefficients in `[−shells, shells]³`.
/// Translations vary slowest, ring order fastest.
pub fn generate_patch(p: &PeriodicPlacement, shells: u32) -> Vec<Tetrahedron> {
    let s = shells as i64;
    let mut out = Vec::with_capacity(6 * (2 * shells as usize + 1).pow(3));
    for i in -s..=s {
        for j in -s..=s {
            for k in -s..=s {
                let shift = p.lattice.point([i, j, k]);
                out.extend(p.ring.tetra.iter().map(|t| t.translated(shift)));
            }
        }
    }
    out
}
