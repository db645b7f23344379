//! The sodalite framework as a 6-ring of tetrahedra with three marked period pairs.

mod cage;
mod ideal;
mod quotient;
mod ring;
mod validate;

pub use cage::{generate_patch, sodalite_cage, CageMember, SodaliteCage};
pub use ideal::{
    cage_tetrahedra, detect_period_marks, ideal_label_of, ideal_lattice, ideal_sodalite, reference_tetrahedron,
};
pub use quotient::{quotient_graph, QuotientEdge, QuotientGraph};
pub use ring::{
    Contact, ContactName, PeriodMark, PeriodicPlacement, RingLabel, Sign, SixRing, VertexLayout, VertexRef,
};
pub use validate::{validate_placement, Check, CheckKind, ValidationReport};
