use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geom::{barycenter, lattice_volume, PeriodLattice, RigidMotion, Tetrahedron, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }
}

/// Label `T_i^±` of a tetrahedron in the 6-ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct RingLabel {
    index: u8,
    sign: Sign,
}

impl RingLabel {
    pub const fn new(index: u8, sign: Sign) -> RingLabel {
        assert!(index >= 1 && index <= 3);
        RingLabel { index, sign }
    }

    /// Cyclic order around the ring: `T1⁻, T3⁺, T2⁻, T1⁺, T3⁻, T2⁺`.
    pub const RING_ORDER: [RingLabel; 6] = [
        RingLabel::new(1, Sign::Minus),
        RingLabel::new(3, Sign::Plus),
        RingLabel::new(2, Sign::Minus),
        RingLabel::new(1, Sign::Plus),
        RingLabel::new(3, Sign::Minus),
        RingLabel::new(2, Sign::Plus),
    ];

    pub fn index(self) -> u8 {
        self.index
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    /// Position in [`RingLabel::RING_ORDER`].
    pub fn position(self) -> usize {
        RingLabel::RING_ORDER.iter().position(|&l| l == self).unwrap()
    }

    pub fn at(position: usize) -> RingLabel {
        RingLabel::RING_ORDER[position % 6]
    }

    /// `T_i^± ↦ T_i^∓`: the diametrically opposite tetrahedron.
    pub fn opposite(self) -> RingLabel {
        RingLabel { index: self.index, sign: self.sign.flip() }
    }
}

impl fmt::Display for RingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}{}", self.index, self.sign.symbol())
    }
}

impl FromStr for RingLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let b = s.as_bytes();
        if b.len() != 3 || b[0] != b'T' {
            return Err(format!("bad ring label {s:?}"));
        }
        let index = match b[1] {
            b'1' => 1,
            b'2' => 2,
            b'3' => 3,
            _ => return Err(format!("bad ring label index in {s:?}")),
        };
        let sign = match b[2] {
            b'+' => Sign::Plus,
            b'-' => Sign::Minus,
            _ => return Err(format!("bad ring label sign in {s:?}")),
        };
        Ok(RingLabel { index, sign })
    }
}

impl From<RingLabel> for String {
    fn from(l: RingLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for RingLabel {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Contact vertices of the spatial hexagon, in cyclic order.
/// Contact `k` joins ring positions `k` and `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContactName {
    P13,
    Q23,
    P12,
    Q13,
    P23,
    Q12,
}

impl ContactName {
    pub const ALL: [ContactName; 6] =
        [ContactName::P13, ContactName::Q23, ContactName::P12, ContactName::Q13, ContactName::P23, ContactName::Q12];

    pub fn position(self) -> usize {
        ContactName::ALL.iter().position(|&c| c == self).unwrap()
    }

    /// The two tetrahedra sharing this vertex.
    pub fn labels(self) -> (RingLabel, RingLabel) {
        let k = self.position();
        (RingLabel::at(k), RingLabel::at(k + 1))
    }
}

impl fmt::Display for ContactName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Vertex `vertex` (0..4) of the ring tetrahedron `label`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexRef {
    pub label: RingLabel,
    pub vertex: usize,
}

impl VertexRef {
    pub fn new(label: RingLabel, vertex: usize) -> Self {
        VertexRef { label, vertex }
    }

    /// Flat slot index `4·position + vertex` in `0..24`.
    pub fn slot(self) -> usize {
        4 * self.label.position() + self.vertex
    }

    pub fn from_slot(slot: usize) -> Self {
        VertexRef { label: RingLabel::at(slot / 4), vertex: slot % 4 }
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.label, self.vertex)
    }
}

impl FromStr for VertexRef {
    type Err = String;
    /// Parses `"T1-[2]"`.
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad vertex reference {s:?}");
        let (label, rest) = s.split_once('[').ok_or_else(bad)?;
        let vertex: usize = rest.strip_suffix(']').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if vertex > 3 {
            return Err(bad());
        }
        Ok(VertexRef::new(label.parse()?, vertex))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contact {
    pub name: ContactName,
    /// Vertex of the tetrahedron at ring position `k`.
    pub first: VertexRef,
    /// Vertex of the tetrahedron at ring position `k + 1`.
    pub second: VertexRef,
}

impl Contact {
    /// The slot that represents this shared vertex (the lower flat slot index).
    pub fn canonical(&self) -> VertexRef {
        if self.first.slot() <= self.second.slot() {
            self.first
        } else {
            self.second
        }
    }

    pub fn duplicate(&self) -> VertexRef {
        if self.first.slot() <= self.second.slot() {
            self.second
        } else {
            self.first
        }
    }
}

/// `position(target) − position(source) = sign · λ_generator`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodMark {
    pub source: VertexRef,
    pub target: VertexRef,
    pub generator: usize,
    pub sign: i8,
}

impl PeriodMark {
    /// Integer coefficients of the period in the generator basis.
    pub fn coefficients(&self) -> [i64; 3] {
        let mut c = [0; 3];
        c[self.generator] = self.sign as i64;
        c
    }
}

/// Six labeled tetrahedra joined in a cycle by six shared (contact) vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct SixRing {
    /// Indexed by ring position, see [`RingLabel::RING_ORDER`].
    pub tetra: [Tetrahedron; 6],
    pub contacts: [Contact; 6],
}

impl SixRing {
    /// Builds a ring and makes each contact's two copies bitwise identical
    /// (the canonical slot's coordinates win).
    pub fn new(mut tetra: [Tetrahedron; 6], contacts: [Contact; 6]) -> SixRing {
        for c in &contacts {
            let (k, d) = (c.canonical(), c.duplicate());
            let p = tetra[k.label.position()].v[k.vertex];
            tetra[d.label.position()].v[d.vertex] = p;
        }
        SixRing { tetra, contacts }
    }

    /// Builds a ring without touching the coordinates (used for fault injection and parsing).
    pub fn new_unsnapped(tetra: [Tetrahedron; 6], contacts: [Contact; 6]) -> SixRing {
        SixRing { tetra, contacts }
    }

    pub fn tet(&self, label: RingLabel) -> &Tetrahedron {
        &self.tetra[label.position()]
    }

    pub fn vertex(&self, r: VertexRef) -> Vec3 {
        self.tetra[r.label.position()].v[r.vertex]
    }

    pub fn contact(&self, name: ContactName) -> &Contact {
        &self.contacts[name.position()]
    }

    pub fn contact_position(&self, name: ContactName) -> Vec3 {
        self.vertex(self.contact(name).canonical())
    }

    pub fn barycenters(&self) -> [Vec3; 6] {
        self.tetra.map(|t| barycenter(&t))
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> SixRing {
        SixRing { tetra: self.tetra.map(|t| t.map(&f)), contacts: self.contacts }
    }

    pub fn transformed(&self, m: &RigidMotion) -> SixRing {
        self.map(|p| m.apply(p))
    }

    /// Largest index-wise vertex distance between two rings.
    pub fn max_vertex_distance(&self, other: &SixRing) -> f64 {
        (0..6).map(|i| self.tetra[i].max_vertex_distance(&other.tetra[i])).fold(0.0, f64::max)
    }
}

/// A 6-ring together with its period lattice and the six period identifications.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPlacement {
    pub ring: SixRing,
    pub lattice: PeriodLattice,
    pub marks: [PeriodMark; 6],
    /// Set by the constructing routine when the generators are (numerically) dependent.
    pub degenerate: bool,
}

impl PeriodicPlacement {
    /// Reads each generator off the first mark that uses it.
    pub fn from_ring(ring: SixRing, marks: [PeriodMark; 6]) -> PeriodicPlacement {
        let mut g = [Vec3::ZERO; 3];
        let mut seen = [false; 3];
        for m in &marks {
            if !seen[m.generator] {
                seen[m.generator] = true;
                g[m.generator] = (ring.vertex(m.target) - ring.vertex(m.source)) * m.sign as f64;
            }
        }
        let lattice = PeriodLattice::new(g);
        let degenerate = lattice.is_degenerate();
        PeriodicPlacement { ring, lattice, marks, degenerate }
    }

    /// Realized vector `target − source` of each mark, divided by its sign.
    pub fn realized_periods(&self) -> [Vec3; 6] {
        self.marks.map(|m| (self.ring.vertex(m.target) - self.ring.vertex(m.source)) * m.sign as f64)
    }

    pub fn transformed(&self, m: &RigidMotion) -> PeriodicPlacement {
        PeriodicPlacement {
            ring: self.ring.transformed(m),
            lattice: self.lattice.transformed(m),
            marks: self.marks,
            degenerate: self.degenerate,
        }
    }

    pub fn volume(&self) -> f64 {
        lattice_volume(&self.lattice)
    }

    pub fn layout(&self) -> VertexLayout {
        VertexLayout::new(&self.ring.contacts)
    }
}

/// Numbering of the distinct ring vertices: the 24 slots minus the 6 duplicated contacts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexLayout {
    /// Canonical slot of each distinct vertex, increasing.
    pub vertices: Vec<VertexRef>,
    /// Distinct-vertex id of every slot `0..24`.
    pub slot_to_vertex: [usize; 24],
}

impl VertexLayout {
    pub fn new(contacts: &[Contact; 6]) -> VertexLayout {
        let mut rep: [usize; 24] = std::array::from_fn(|s| s);
        for c in contacts {
            rep[c.duplicate().slot()] = c.canonical().slot();
        }
        let mut vertices = Vec::new();
        let mut id_of_slot = [usize::MAX; 24];
        for s in 0..24 {
            if rep[s] == s {
                id_of_slot[s] = vertices.len();
                vertices.push(VertexRef::from_slot(s));
            }
        }
        let slot_to_vertex = std::array::from_fn(|s| id_of_slot[rep[s]]);
        VertexLayout { vertices, slot_to_vertex }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn id(&self, r: VertexRef) -> usize {
        self.slot_to_vertex[r.slot()]
    }

    pub fn positions(&self, ring: &SixRing) -> Vec<Vec3> {
        self.vertices.iter().map(|&r| ring.vertex(r)).collect()
    }
}
