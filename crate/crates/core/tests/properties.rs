use proptest::prelude::*;

use sodalite::deform::central::{central_deform, sample_params, CentralParams};
use sodalite::deform::dihedral::{
    build_d3_ring, frame_reflection_mismatch, periodicity_residual, solve_generating_edge, D3Branch, D3Frame,
    D3RingParams,
};
use sodalite::framework::{validate_placement, CheckKind};
use sodalite::geom::{RigidMotion, Rotation, Vec3};
use sodalite::io::{placement_from_json, placement_to_json};
use sodalite::symmetry::{central_symmetry_residual, d3_residual};

fn rotation() -> impl Strategy<Value = Rotation> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter_map("zero quaternion", |(w, x, y, z)| Rotation::from_quaternion(w, x, y, z))
}

fn motion() -> impl Strategy<Value = RigidMotion> {
    (rotation(), -5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0)
        .prop_map(|(r, x, y, z)| RigidMotion::new(r, Vec3::new(x, y, z)))
}

/// Feasible D₃ parameters: `t` picks a point inside the first feasible arc.
fn d3_params() -> impl Strategy<Value = D3RingParams> {
    (0.05f64..1.01, 0.01f64..0.99, prop::bool::ANY, prop::bool::ANY).prop_map(|(rho, t, root, mirror)| {
        let fam = solve_generating_edge(&D3Frame::ideal(), rho).unwrap();
        let (lo, hi) = fam.intervals[0];
        D3RingParams {
            rho,
            phi: lo + t * (hi - lo),
            branch: D3Branch { root: if root { 1 } else { -1 }, mirror: if mirror { 1 } else { -1 } },
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn central_component_is_valid((r_a, r_b) in (rotation(), rotation())) {
        let p = central_deform(&CentralParams { r_a, r_b });
        prop_assume!(!p.degenerate);
        let report = validate_placement(&p, 1e-9);
        prop_assert!(report.passed(), "{}", report);
        prop_assert!(report.check(CheckKind::GeneratorPairs).passed);
        prop_assert!(central_symmetry_residual(&p.ring).value < 1e-10);
    }

    #[test]
    fn d3_rings_are_symmetric_and_regular(params in d3_params()) {
        let r = build_d3_ring(&params).unwrap();
        prop_assert!(d3_residual(&r).value < 1e-9);
        prop_assert!(frame_reflection_mismatch(&D3Frame::ideal(), &r) < 1e-9);
        for t in &r.tetra {
            for l in t.edge_lengths() {
                prop_assert!((l - 2.0 * (std::f64::consts::SQRT_2 - 1.0)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn periodicity_residual_is_even_under_the_hexagon_mirror(params in d3_params()) {
        let mirrored = D3RingParams {
            phi: std::f64::consts::PI - params.phi,
            branch: D3Branch { root: -params.branch.root, mirror: -params.branch.mirror },
            ..params
        };
        let a = periodicity_residual(&build_d3_ring(&params).unwrap());
        let b = periodicity_residual(&build_d3_ring(&mirrored).unwrap());
        prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn residuals_are_rigid_motion_invariant(params in d3_params(), g in motion()) {
        let r = build_d3_ring(&params).unwrap();
        let s = r.transformed(&g);
        prop_assert!((d3_residual(&r).value - d3_residual(&s).value).abs() < 1e-9);
        prop_assert!((central_symmetry_residual(&r).value - central_symmetry_residual(&s).value).abs() < 1e-9);
        prop_assert!((periodicity_residual(&r).abs() - periodicity_residual(&s).abs()).abs() < 1e-9);
    }

    #[test]
    fn placements_round_trip_bit_exactly(seed in any::<u64>(), index in 0u64..1000) {
        let p = central_deform(&sample_params(seed, index));
        let q = placement_from_json(&placement_to_json(&p)).unwrap();
        prop_assert_eq!(p, q);
    }
}
