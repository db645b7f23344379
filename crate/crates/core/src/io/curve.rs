//! CSV output of traced curves.

use crate::deform::dihedral::TiltPoint;
use crate::error::Result;

pub const TILT_CSV_HEADER: [&str; 7] =
    ["rho", "phi", "lattice_volume", "central_residual", "d3_residual", "periodicity_residual", "tetrahedrite_flag"];

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per point; reals in 17-digit scientific notation, the flag as 0/1.
pub fn tilt_csv(points: &[TiltPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TILT_CSV_HEADER).map_err(std::io::Error::from)?;
    for p in points {
        w.write_record([
            sci(p.rho),
            sci(p.phi),
            sci(p.lattice_volume),
            sci(p.central_residual),
            sci(p.d3_residual),
            sci(p.periodicity_residual),
            (p.tetrahedrite as u8).to_string(),
        ])
        .map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}
