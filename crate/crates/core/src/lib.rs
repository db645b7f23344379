//! Ideal sodalite as a periodic framework of regular tetrahedra, and its deformations.

pub mod consts;
pub mod deform;
pub mod error;
pub mod framework;
pub mod geom;
pub mod io;
pub mod rigidity;
pub mod roots;
pub mod symmetry;

pub use error::{Error, Result};
