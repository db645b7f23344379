//! The cube point group, its action on ring labels, and numerical symmetry residuals.

use std::fmt;

use serde::Serialize;

use crate::framework::{ideal_sodalite, ContactName, RingLabel, SixRing};
use crate::geom::{barycenter, invert, planarity_defect, reflect, Tetrahedron, Vec3};

/// `(g·v)ᵢ = signᵢ · v[perm[i]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    pub perm: [usize; 3],
    pub signs: [i8; 3],
}

impl SignedPermutation {
    pub const IDENTITY: SignedPermutation = SignedPermutation { perm: [0, 1, 2], signs: [1, 1, 1] };

    /// Swap of coordinates `i` and `j`.
    pub fn transposition(i: usize, j: usize) -> SignedPermutation {
        let mut perm = [0, 1, 2];
        perm.swap(i, j);
        SignedPermutation { perm, signs: [1; 3] }
    }

    /// Moves coordinate 1 to slot 2, 2 to 3 and 3 to 1: `(x, y, z) ↦ (z, x, y)`.
    pub fn cyclic() -> SignedPermutation {
        SignedPermutation { perm: [2, 0, 1], signs: [1; 3] }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.signs[0] as f64 * v[self.perm[0]],
            self.signs[1] as f64 * v[self.perm[1]],
            self.signs[2] as f64 * v[self.perm[2]],
        )
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        SignedPermutation {
            perm: self.perm.map(|p| other.perm[p]),
            signs: [0, 1, 2].map(|i| self.signs[i] * other.signs[self.perm[i]]),
        }
    }

    pub fn inverse(&self) -> SignedPermutation {
        let mut perm = [0; 3];
        let mut signs = [1; 3];
        for i in 0..3 {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        SignedPermutation { perm, signs }
    }

    pub fn determinant(&self) -> i8 {
        let parity = if (self.perm[0] + 1) % 3 == self.perm[1] { 1 } else { -1 };
        parity * self.signs.iter().product::<i8>()
    }
}

/// All 48 signed permutations: permutations in lexicographic order, each with the sign
/// patterns `+++, ++−, +−+, …, −−−`.
pub fn cube_group() -> Vec<SignedPermutation> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(48);
    for perm in PERMS {
        for bits in 0..8u8 {
            let signs = [4, 2, 1].map(|b| if bits & b == 0 { 1 } else { -1 });
            out.push(SignedPermutation { perm, signs });
        }
    }
    out
}

/// Induced action on the six ring labels. `image[k]` is the label hit by the tetrahedron at ring
/// position `k`, or `None` when its image leaves the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabelAction {
    pub image: [Option<RingLabel>; 6],
}

impl LabelAction {
    pub fn stabilizes_ring(&self) -> bool {
        self.image.iter().all(|i| i.is_some())
    }

    pub fn apply(&self, l: RingLabel) -> Option<RingLabel> {
        self.image[l.position()]
    }

    pub fn is_identity(&self) -> bool {
        (0..6).all(|k| self.image[k] == Some(RingLabel::at(k)))
    }

    /// `self ∘ other`; `None` if either fails to stabilize the ring.
    pub fn compose(&self, other: &LabelAction) -> Option<LabelAction> {
        let mut image = [None; 6];
        for (k, slot) in image.iter_mut().enumerate() {
            *slot = Some(self.apply(other.image[k]?)?);
        }
        Some(LabelAction { image })
    }

    /// Disjoint cycles of length ≥ 2, each starting at its earliest ring position.
    pub fn cycles(&self) -> Option<Vec<Vec<RingLabel>>> {
        if !self.stabilizes_ring() {
            return None;
        }
        let mut seen = [false; 6];
        let mut out = Vec::new();
        for start in 0..6 {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                cyc.push(RingLabel::at(k));
                k = self.image[k].unwrap().position();
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        Some(out)
    }
}

impl fmt::Display for LabelAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cycles() {
            None => write!(f, "(does not stabilize the ring)"),
            Some(c) if c.is_empty() => write!(f, "()"),
            Some(c) => {
                for cyc in c {
                    let names: Vec<String> = cyc.iter().map(|l| l.to_string()).collect();
                    write!(f, "({})", names.join(","))?;
                }
                Ok(())
            }
        }
    }
}

/// Action of `g` on the labels of the ideal ring, by matching transformed barycenters.
pub fn ring_label_action(g: &SignedPermutation) -> LabelAction {
    let ring = ideal_sodalite().ring;
    let bs = ring.barycenters();
    let image = bs.map(|b| {
        let gb = g.apply(b);
        (0..6).find(|&j| bs[j].distance(gb) <= 1e-9).map(RingLabel::at)
    });
    LabelAction { image }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SymmetryWitness {
    Inversion {
        /// Midpoint of the contacts `P13` and `Q13`.
        center: Vec3,
        /// Centroid of all ring vertices (diagnostic).
        fitted_center: Vec3,
        /// The residual measured about `fitted_center`.
        fitted_value: f64,
    },
    Dihedral {
        center: Vec3,
        axis: Vec3,
        /// Normals of the planes `Π12`, `Π13`, `Π23`.
        normals: [Vec3; 3],
        /// Largest distance of a barycenter from the fitted hexagon plane.
        coplanarity_defect: f64,
        /// Set when the barycenters are not coplanar within [`COPLANARITY_TOL`].
        flagged: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryResidual {
    /// Max-norm vertex mismatch (model units).
    pub value: f64,
    pub witness: SymmetryWitness,
}

pub const COPLANARITY_TOL: f64 = 1e-9;

/// Largest distance from a vertex of `a` to the nearest vertex of `b`, both ways.
fn set_mismatch(a: &Tetrahedron, b: &Tetrahedron) -> f64 {
    a.nearest_vertex_mismatch(b).max(b.nearest_vertex_mismatch(a))
}

fn inversion_value(r: &SixRing, center: Vec3) -> f64 {
    RingLabel::RING_ORDER
        .iter()
        .map(|&l| set_mismatch(&r.tet(l).map(|p| invert(p, center)), r.tet(l.opposite())))
        .fold(0.0, f64::max)
}

/// Residual of the point inversion through the midpoint of `P13 Q13` exchanging `Tᵢ⁺` and `Tᵢ⁻`.
pub fn central_symmetry_residual(r: &SixRing) -> SymmetryResidual {
    let center = (r.contact_position(ContactName::P13) + r.contact_position(ContactName::Q13)) * 0.5;
    let fitted_center = r.tetra.iter().flat_map(|t| t.v).sum::<Vec3>() / 24.0;
    SymmetryResidual {
        value: inversion_value(r, center),
        witness: SymmetryWitness::Inversion { center, fitted_center, fitted_value: inversion_value(r, fitted_center) },
    }
}

/// The three mirror pairings, from the coordinate transpositions acting on the ideal labels:
/// `Π12 ↔ (x y)`, `Π13 ↔ (x z)`, `Π23 ↔ (y z)`.
pub fn mirror_pairings() -> [LabelAction; 3] {
    [(0, 1), (0, 2), (1, 2)].map(|(i, j)| ring_label_action(&SignedPermutation::transposition(i, j)))
}

/// Contacts lying on each mirror plane `Π12`, `Π13`, `Π23`, as `(P, Q)`.
pub const MIRROR_CONTACTS: [(ContactName, ContactName); 3] =
    [(ContactName::P12, ContactName::Q12), (ContactName::P13, ContactName::Q13), (ContactName::P23, ContactName::Q23)];

/// Frame fitted to a ring: hexagon center, oriented axis (Newell normal of the barycenter
/// hexagon in ring order), and mirror normals `axis × (Q − P)` for the contact pairs.
pub fn fitted_d3_frame(r: &SixRing) -> (Vec3, Vec3, [Vec3; 3], f64) {
    let bs = r.barycenters();
    let center = bs.iter().copied().sum::<Vec3>() / 6.0;
    let mut n = Vec3::ZERO;
    for k in 0..6 {
        n += (bs[k] - center).cross(bs[(k + 1) % 6] - center);
    }
    let axis = n.normalize();
    let normals = MIRROR_CONTACTS.map(|(p, q)| axis.cross(r.contact_position(q) - r.contact_position(p)).normalize());
    (center, axis, normals, planarity_defect(&bs))
}

/// Residual of the three reflections through the fitted hexagon axis, pairing tetrahedra as the
/// coordinate transpositions pair the ideal labels.
pub fn d3_residual(r: &SixRing) -> SymmetryResidual {
    let (center, axis, normals, defect) = fitted_d3_frame(r);
    let pairings = mirror_pairings();
    let mut value: f64 = 0.0;
    for (n, pairing) in normals.iter().zip(&pairings) {
        for l in RingLabel::RING_ORDER {
            let img = pairing.apply(l).expect("transpositions stabilize the ring");
            let m = set_mismatch(&r.tet(l).map(|p| reflect(p, center, *n)), r.tet(img));
            value = value.max(m);
        }
    }
    SymmetryResidual {
        value,
        witness: SymmetryWitness::Dihedral {
            center,
            axis,
            normals,
            coplanarity_defect: defect,
            flagged: !(defect <= COPLANARITY_TOL),
        },
    }
}

/// Whether `g` maps the 24 cage tetrahedra of the ideal placement onto themselves.
pub fn permutes_cage(g: &SignedPermutation, cage: &[Tetrahedron]) -> bool {
    cage.iter().all(|t| {
        let b = g.apply(barycenter(t));
        cage.iter().any(|s| barycenter(s).distance(b) <= 1e-9)
    })
}
