//! Elementary 3D geometry: vectors, rotations, tetrahedra, lattices, Voronoi cells.

mod lattice;
mod rotation;
mod tetra;
mod vec3;
mod voronoi;

pub use lattice::{lattice_volume, PeriodLattice, DEGENERATE_REL};
pub use rotation::{RigidMotion, Rotation};
pub use tetra::{barycenter, circumsphere, is_regular_tetrahedron, Tetrahedron, TETRA_EDGES};
pub use vec3::{det3, Vec3};
pub use voronoi::{planarity_defect, voronoi_cell, CellCheck, ConvexCell, VERTEX_DEDUP_TOL, VORONOI_SHELL};

/// Reflection of `p` in the plane through `point` with unit normal `n`.
pub fn reflect(p: Vec3, point: Vec3, n: Vec3) -> Vec3 {
    p - n * (2.0 * (p - point).dot(n))
}

/// Point inversion through `center`.
pub fn invert(p: Vec3, center: Vec3) -> Vec3 {
    center * 2.0 - p
}
