use std::sync::OnceLock;

use super::ring::{Contact, ContactName, PeriodMark, PeriodicPlacement, RingLabel, SixRing, VertexLayout, VertexRef};
use crate::consts::{ring_center, SQRT2};
use crate::error::{Error, Result};
use crate::geom::{barycenter, PeriodLattice, Tetrahedron, Vec3};
use crate::symmetry::cube_group;

/// Coincidence tolerance used when reading the ideal structure off coordinates.
const MATCH_TOL: f64 = 1e-9;

/// The tetrahedron touching the cube at `(1, 0, 1)`.
pub fn reference_tetrahedron() -> Tetrahedron {
    let a = SQRT2 - 1.0;
    Tetrahedron::new([
        Vec3::new(1.0, 0.0, 1.0),
        Vec3::new(1.0, 0.0, 2.0 * SQRT2 - 1.0),
        Vec3::new(a, a, SQRT2),
        Vec3::new(a, -a, SQRT2),
    ])
}

/// Generators `√2(1,−1,−1)`, `√2(−1,1,−1)`, `√2(−1,−1,1)`.
pub fn ideal_lattice() -> PeriodLattice {
    PeriodLattice::new([
        Vec3::new(SQRT2, -SQRT2, -SQRT2),
        Vec3::new(-SQRT2, SQRT2, -SQRT2),
        Vec3::new(-SQRT2, -SQRT2, SQRT2),
    ])
}

/// The 24 distinct images of [`reference_tetrahedron`] under the cube group, in group order.
/// For each barycenter the first group element reaching it fixes the vertex order.
pub fn cage_tetrahedra() -> Vec<Tetrahedron> {
    let t0 = reference_tetrahedron();
    let mut out: Vec<Tetrahedron> = Vec::with_capacity(24);
    for g in cube_group() {
        let t = t0.map(|p| g.apply(p));
        let b = barycenter(&t);
        if !out.iter().any(|s| barycenter(s).distance(b) <= MATCH_TOL) {
            out.push(t);
        }
    }
    out
}

/// The maximal-symmetry placement. Computed once; every call returns the same value.
pub fn ideal_sodalite() -> PeriodicPlacement {
    static IDEAL: OnceLock<PeriodicPlacement> = OnceLock::new();
    IDEAL.get_or_init(|| build_ideal().expect("ideal construction is self-consistent")).clone()
}

fn build_ideal() -> Result<PeriodicPlacement> {
    let c = ring_center();
    let candidates: Vec<Tetrahedron> =
        cage_tetrahedra().into_iter().filter(|t| (barycenter(t).distance(c) - 1.0).abs() <= MATCH_TOL).collect();
    if candidates.len() != 6 {
        return Err(Error::InvalidPlacement(format!("expected 6 ring tetrahedra, found {}", candidates.len())));
    }
    let tetra = order_ring(&candidates)?;
    let contacts = find_contacts(&tetra)?;
    let ring = SixRing::new(tetra, contacts);
    let marks = detect_period_marks(&ring, &ideal_lattice(), MATCH_TOL)?;
    let mut p = PeriodicPlacement::from_ring(ring, marks);
    // keep the exact generators rather than the differences of rounded coordinates
    p.lattice = ideal_lattice();
    Ok(p)
}

/// Walks the ring starting at the reference tetrahedron `T1-`, first toward the neighbour
/// whose barycenter has the larger x coordinate.
fn order_ring(cands: &[Tetrahedron]) -> Result<[Tetrahedron; 6]> {
    let t0 = reference_tetrahedron();
    let bs: Vec<Vec3> = cands.iter().map(barycenter).collect();
    let start = bs
        .iter()
        .position(|b| b.distance(barycenter(&t0)) <= MATCH_TOL)
        .ok_or_else(|| Error::InvalidPlacement("reference tetrahedron not in the ring".into()))?;
    let neighbours = |i: usize| -> Vec<usize> {
        (0..bs.len()).filter(|&j| j != i && (bs[i].distance(bs[j]) - 1.0).abs() <= 1e-6).collect()
    };
    let first = neighbours(start);
    if first.len() != 2 {
        return Err(Error::InvalidPlacement("ring barycenters do not form a hexagon".into()));
    }
    let next = if bs[first[0]].x > bs[first[1]].x { first[0] } else { first[1] };
    let mut order = vec![start, next];
    while order.len() < 6 {
        let (prev, cur) = (order[order.len() - 2], order[order.len() - 1]);
        let n = neighbours(cur)
            .into_iter()
            .find(|&j| j != prev)
            .ok_or_else(|| Error::InvalidPlacement("ring barycenters do not form a hexagon".into()))?;
        order.push(n);
    }
    Ok(std::array::from_fn(|k| cands[order[k]]))
}

fn find_contacts(tetra: &[Tetrahedron; 6]) -> Result<[Contact; 6]> {
    let mut out = Vec::with_capacity(6);
    for name in ContactName::ALL {
        let (la, lb) = name.labels();
        let (ta, tb) = (&tetra[la.position()], &tetra[lb.position()]);
        let mut found = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                if ta.v[i].distance(tb.v[j]) <= MATCH_TOL {
                    found.push((i, j));
                }
            }
        }
        let [(i, j)] = found[..] else {
            return Err(Error::InvalidPlacement(format!("{name}: expected one shared vertex, found {}", found.len())));
        };
        out.push(Contact { name, first: VertexRef::new(la, i), second: VertexRef::new(lb, j) });
    }
    Ok(out.try_into().unwrap())
}

/// Records `source → target` whenever `source + λₖ` lands on another distinct ring vertex.
/// Exactly six marks, two per generator, are required.
pub fn detect_period_marks(ring: &SixRing, lattice: &PeriodLattice, tol: f64) -> Result<[PeriodMark; 6]> {
    let layout = VertexLayout::new(&ring.contacts);
    let pos = layout.positions(ring);
    let mut marks = Vec::new();
    for (i, &p) in pos.iter().enumerate() {
        for (k, &g) in lattice.g.iter().enumerate() {
            for (j, &q) in pos.iter().enumerate() {
                if i != j && (p + g).distance(q) <= tol {
                    marks.push(PeriodMark {
                        source: layout.vertices[i],
                        target: layout.vertices[j],
                        generator: k,
                        sign: 1,
                    });
                }
            }
        }
    }
    let per_generator = (0..3).map(|k| marks.iter().filter(|m| m.generator == k).count());
    if marks.len() != 6 || per_generator.into_iter().any(|c| c != 2) {
        return Err(Error::PeriodMarks { found: marks.len() });
    }
    Ok(marks.try_into().unwrap())
}

/// Ring label of each tetrahedron of the ideal placement, by barycenter lookup.
pub fn ideal_label_of(b: Vec3, tol: f64) -> Option<RingLabel> {
    let p = ideal_sodalite();
    RingLabel::RING_ORDER.into_iter().find(|&l| barycenter(p.ring.tet(l)).distance(b) <= tol)
}
