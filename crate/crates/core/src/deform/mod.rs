//! Explicit deformation families of the ideal placement.

pub mod central;
pub mod dihedral;
