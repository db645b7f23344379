//! JSON documents for periodic placements.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{Contact, ContactName, PeriodMark, PeriodicPlacement, RingLabel, SixRing, VertexRef};
use crate::geom::{PeriodLattice, Tetrahedron, Vec3};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementDocument {
    pub schema_version: u32,
    /// Distinct ring vertices; contact vertices appear once.
    pub vertices: Vec<[f64; 3]>,
    pub tetrahedra: Vec<TetrahedronRecord>,
    pub contacts: Vec<ContactRecord>,
    /// Generator rows.
    pub lattice: Vec<[f64; 3]>,
    pub period_marks: Vec<PeriodMarkRecord>,
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TetrahedronRecord {
    pub label: String,
    pub vertices: [usize; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactRecord {
    pub name: ContactName,
    /// `"T1-[0]"` style vertex references, ring position `k` first.
    pub first: String,
    pub second: String,
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodMarkRecord {
    pub source: usize,
    pub target: usize,
    pub source_ref: String,
    pub target_ref: String,
    /// `target − source` in the generator basis.
    pub generator_coefficients: [i64; 3],
}

impl PlacementDocument {
    pub fn from_placement(p: &PeriodicPlacement) -> PlacementDocument {
        let layout = p.layout();
        let vertices = layout.positions(&p.ring).into_iter().map(Vec3::to_array).collect();
        let tetrahedra = RingLabel::RING_ORDER
            .iter()
            .map(|&label| TetrahedronRecord {
                label: label.to_string(),
                vertices: std::array::from_fn(|i| layout.id(VertexRef::new(label, i))),
            })
            .collect();
        let contacts = p
            .ring
            .contacts
            .iter()
            .map(|c| ContactRecord {
                name: c.name,
                first: c.first.to_string(),
                second: c.second.to_string(),
                vertex: layout.id(c.canonical()),
            })
            .collect();
        let period_marks = p
            .marks
            .iter()
            .map(|m| PeriodMarkRecord {
                source: layout.id(m.source),
                target: layout.id(m.target),
                source_ref: m.source.to_string(),
                target_ref: m.target.to_string(),
                generator_coefficients: m.coefficients(),
            })
            .collect();
        PlacementDocument {
            schema_version: SCHEMA_VERSION,
            vertices,
            tetrahedra,
            contacts,
            lattice: p.lattice.g.iter().map(|g| g.to_array()).collect(),
            period_marks,
            degenerate: p.degenerate,
        }
    }

    /// Structural checks only; geometric consistency is left to validation.
    pub fn to_placement(&self) -> Result<PeriodicPlacement> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::parse(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let vertices: Vec<Vec3> = self.vertices.iter().map(|&v| Vec3::from(v)).collect();
        let vertex = |idx: usize, loc: &dyn Fn() -> String| -> Result<Vec3> {
            vertices.get(idx).copied().ok_or_else(|| {
                Error::parse(loc(), format!("vertex index {idx} out of range ({} vertices)", vertices.len()))
            })
        };

        let mut tetra: [Option<(Tetrahedron, [usize; 4])>; 6] = [None; 6];
        for (k, rec) in self.tetrahedra.iter().enumerate() {
            let loc = || format!("tetrahedra[{k}]");
            let label: RingLabel = rec.label.parse().map_err(|e: String| Error::parse(loc(), e))?;
            let slot = &mut tetra[label.position()];
            if slot.is_some() {
                return Err(Error::parse(loc(), format!("duplicate tetrahedron {label}")));
            }
            let mut v = [Vec3::ZERO; 4];
            for i in 0..4 {
                v[i] = vertex(rec.vertices[i], &|| format!("tetrahedra[{k}].vertices[{i}]"))?;
            }
            *slot = Some((Tetrahedron::new(v), rec.vertices));
        }
        let missing: Vec<String> =
            RingLabel::RING_ORDER.iter().filter(|l| tetra[l.position()].is_none()).map(|l| l.to_string()).collect();
        if !missing.is_empty() {
            return Err(Error::parse("tetrahedra", format!("missing tetrahedron {}", missing.join(", "))));
        }
        let tetra = tetra.map(Option::unwrap);
        let index_of = |r: VertexRef| tetra[r.label.position()].1[r.vertex];
        let parse_ref =
            |s: &str, loc: String| -> Result<VertexRef> { s.parse().map_err(|e: String| Error::parse(loc, e)) };

        let mut contacts: [Option<Contact>; 6] = [None; 6];
        for (k, rec) in self.contacts.iter().enumerate() {
            let first = parse_ref(&rec.first, format!("contacts[{k}].first"))?;
            let second = parse_ref(&rec.second, format!("contacts[{k}].second"))?;
            if (first.label, second.label) != rec.name.labels() {
                return Err(Error::parse(
                    format!("contacts[{k}]"),
                    format!("{:?} must join {} and {}", rec.name, rec.name.labels().0, rec.name.labels().1),
                ));
            }
            if index_of(first) != rec.vertex || index_of(second) != rec.vertex {
                return Err(Error::parse(
                    format!("contacts[{k}].vertex"),
                    format!("{first} and {second} do not both use vertex {}", rec.vertex),
                ));
            }
            let slot = &mut contacts[rec.name.position()];
            if slot.is_some() {
                return Err(Error::parse(format!("contacts[{k}]"), format!("duplicate contact {:?}", rec.name)));
            }
            *slot = Some(Contact { name: rec.name, first, second });
        }
        if let Some(name) = ContactName::ALL.iter().find(|n| contacts[n.position()].is_none()) {
            return Err(Error::parse("contacts", format!("missing contact {name:?}")));
        }
        let contacts = contacts.map(Option::unwrap);
        let shared: BTreeSet<usize> = contacts.iter().map(|c| index_of(c.first)).collect();
        let used: Vec<usize> = tetra.iter().flat_map(|t| t.1).collect();
        for (i, &idx) in used.iter().enumerate() {
            if !shared.contains(&idx) && used.iter().filter(|&&j| j == idx).count() > 1 {
                return Err(Error::parse(
                    format!("tetrahedra[{}]", i / 4),
                    format!("vertex {idx} is shared but is not a contact"),
                ));
            }
        }

        if self.lattice.len() != 3 {
            return Err(Error::parse("lattice", format!("expected 3 generators, found {}", self.lattice.len())));
        }
        let lattice = PeriodLattice::new(std::array::from_fn(|k| Vec3::from(self.lattice[k])));

        if self.period_marks.len() != 6 {
            return Err(Error::parse("period_marks", format!("expected 6 marks, found {}", self.period_marks.len())));
        }
        let mut marks = Vec::with_capacity(6);
        for (k, rec) in self.period_marks.iter().enumerate() {
            let loc = |f: &str| format!("period_marks[{k}].{f}");
            let source = parse_ref(&rec.source_ref, loc("source_ref"))?;
            let target = parse_ref(&rec.target_ref, loc("target_ref"))?;
            if index_of(source) != rec.source {
                return Err(Error::parse(loc("source"), format!("{source} is vertex {}", index_of(source))));
            }
            if index_of(target) != rec.target {
                return Err(Error::parse(loc("target"), format!("{target} is vertex {}", index_of(target))));
            }
            let c = rec.generator_coefficients;
            let nonzero: Vec<usize> = (0..3).filter(|&i| c[i] != 0).collect();
            let [generator] = nonzero[..] else {
                return Err(Error::parse(loc("generator_coefficients"), "expected a single generator"));
            };
            if c[generator].abs() != 1 {
                return Err(Error::parse(loc("generator_coefficients"), "coefficient must be +1 or -1"));
            }
            marks.push(PeriodMark { source, target, generator, sign: c[generator] as i8 });
        }
        let marks: [PeriodMark; 6] = marks.try_into().unwrap();

        let ring = SixRing::new_unsnapped(tetra.map(|t| t.0), contacts);
        Ok(PeriodicPlacement { ring, lattice, marks, degenerate: self.degenerate })
    }
}

/// Pretty-printed JSON with shortest round-trip floats.
pub fn placement_to_json(p: &PeriodicPlacement) -> String {
    let mut s = serde_json::to_string_pretty(&PlacementDocument::from_placement(p)).expect("finite placement");
    s.push('\n');
    s
}

pub fn placement_from_json(text: &str) -> Result<PeriodicPlacement> {
    let doc: PlacementDocument = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    doc.to_placement()
}

pub fn write_placement(path: &std::path::Path, p: &PeriodicPlacement) -> Result<()> {
    std::fs::write(path, placement_to_json(p))?;
    Ok(())
}

pub fn read_placement(path: &std::path::Path) -> Result<PeriodicPlacement> {
    placement_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::central::sample_central;
    use crate::framework::{ideal_sodalite, validate_placement, CheckKind};

    fn bits(p: &PeriodicPlacement) -> Vec<u64> {
        let mut out: Vec<u64> =
            p.ring.tetra.iter().flat_map(|t| t.v).flat_map(|v| v.to_array()).map(f64::to_bits).collect();
        out.extend(p.lattice.g.iter().flat_map(|g| g.to_array()).map(f64::to_bits));
        out
    }

    #[test]
    fn ideal_round_trips_bit_exactly() {
        let p = ideal_sodalite();
        let q = placement_from_json(&placement_to_json(&p)).unwrap();
        assert_eq!(bits(&p), bits(&q));
        assert_eq!(p, q);
    }

    #[test]
    fn samples_round_trip_bit_exactly() {
        for p in sample_central(20, 5) {
            let q = placement_from_json(&placement_to_json(&p)).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn document_layout() {
        let doc = PlacementDocument::from_placement(&ideal_sodalite());
        assert_eq!(doc.vertices.len(), 18);
        assert_eq!(doc.tetrahedra.len(), 6);
        assert_eq!(doc.tetrahedra[0].label, "T1-");
        assert_eq!(doc.period_marks[0].generator_coefficients, [0, 1, 0]);
    }

    #[test]
    fn missing_tetrahedron_is_named() {
        let mut doc = PlacementDocument::from_placement(&ideal_sodalite());
        doc.tetrahedra.remove(3);
        let text = serde_json::to_string(&doc).unwrap();
        match placement_from_json(&text) {
            Err(Error::Parse { location, message }) => {
                assert_eq!(location, "tetrahedra");
                assert!(message.contains("T1+"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        match placement_from_json("{\"schema_version\": 1,\n \"vertices\": [[1, 2]]") {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("line 2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_schema_version_is_rejected() {
        let mut doc = PlacementDocument::from_placement(&ideal_sodalite());
        doc.schema_version = 2;
        let err = doc.to_placement().unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == "schema_version"));
    }

    #[test]
    fn bad_generator_coefficients_are_rejected() {
        let mut doc = PlacementDocument::from_placement(&ideal_sodalite());
        doc.period_marks[2].generator_coefficients = [1, 1, 0];
        assert!(matches!(doc.to_placement(), Err(Error::Parse { .. })));
    }

    #[test]
    fn inconsistent_mark_loads_but_fails_validation() {
        let mut doc = PlacementDocument::from_placement(&ideal_sodalite());
        doc.lattice[1][0] += 1e-3;
        let p = doc.to_placement().unwrap();
        let report = validate_placement(&p, 1e-9);
        assert!(!report.check(CheckKind::PeriodMarks).passed);
    }
}
