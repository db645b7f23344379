//! Numerical constants of the ideal sodalite model (cube of side 2 centred at the origin).

use crate::geom::Vec3;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Half the tetrahedron edge, `√2 − 1`.
pub const HALF_EDGE: f64 = SQRT2 - 1.0;

/// Tetrahedron edge length `2(√2 − 1)`.
pub const EDGE: f64 = 2.0 * HALF_EDGE;

/// Circumradius of a regular tetrahedron with edge [`EDGE`]: `EDGE · √(3/8)`.
pub fn circumradius() -> f64 {
    EDGE * (3.0f64 / 8.0).sqrt()
}

/// Centre of the highlighted 6-ring, `(1, 1, 1)/√2`.
pub fn ring_center() -> Vec3 {
    Vec3::splat(std::f64::consts::FRAC_1_SQRT_2)
}

/// Default tolerance for structural checks on constructed placements.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Tolerance for placements produced by iterative solvers.
pub const SOLVER_TOL: f64 = 1e-8;
