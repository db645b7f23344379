//! File formats: JSON placements, OBJ geometry, CSV curves.

pub mod curve;
pub mod obj;
pub mod placement;

pub use curve::{tilt_csv, TILT_CSV_HEADER};
pub use obj::{export_cell_obj, export_obj, parse_obj, ObjMesh};
pub use placement::{
    placement_from_json, placement_to_json, read_placement, write_placement, PlacementDocument, SCHEMA_VERSION,
};
