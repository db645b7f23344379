//! The centrally-symmetric component: `T2⁺` fixed, `T1⁻` and `T3⁻` rotated about their contacts
//! with it, the other three tetrahedra completed by point inversion.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::consts::SQRT2;
use crate::framework::{ideal_sodalite, ContactName, PeriodicPlacement, RingLabel, Sign, SixRing};
use crate::geom::{invert, RigidMotion, Rotation, Tetrahedron, Vec3, DEGENERATE_REL};
use crate::rigidity::placement_variables;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralParams {
    /// Applied to `T1⁻` about `Q12`.
    pub r_a: Rotation,
    /// Applied to `T3⁻` about `P23`.
    pub r_b: Rotation,
}

impl CentralParams {
    pub const IDENTITY: CentralParams = CentralParams { r_a: Rotation::IDENTITY, r_b: Rotation::IDENTITY };

    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> CentralParams {
        let r_a = Rotation::random(rng);
        let r_b = Rotation::random(rng);
        CentralParams { r_a, r_b }
    }
}

/// Placements with `|det| < DEGENERATE_REL · (2√2)³` are flagged degenerate.
pub fn central_degeneracy_threshold() -> f64 {
    DEGENERATE_REL * (2.0 * SQRT2).powi(3)
}

const T1M: RingLabel = RingLabel::new(1, Sign::Minus);
const T2P: RingLabel = RingLabel::new(2, Sign::Plus);
const T3M: RingLabel = RingLabel::new(3, Sign::Minus);

/// Vertex correspondence of the inversion: `σ(T_l[i]) = T_opp(l)[perm[l][i]]`, read off `base`.
fn inversion_indices(base: &SixRing) -> [[usize; 4]; 6] {
    let c = (base.contact_position(ContactName::P13) + base.contact_position(ContactName::Q13)) * 0.5;
    std::array::from_fn(|k| {
        let l = RingLabel::at(k);
        let t = base.tet(l);
        let o = base.tet(l.opposite());
        std::array::from_fn(|i| {
            let p = invert(t.v[i], c);
            (0..4).min_by(|&a, &b| o.v[a].distance(p).total_cmp(&o.v[b].distance(p))).unwrap()
        })
    })
}

fn ideal_inversion_indices() -> &'static [[usize; 4]; 6] {
    static P: OnceLock<[[usize; 4]; 6]> = OnceLock::new();
    P.get_or_init(|| inversion_indices(&ideal_sodalite().ring))
}

/// [`central_deform_from`] at the ideal placement.
pub fn central_deform(params: &CentralParams) -> PeriodicPlacement {
    complete(&ideal_sodalite(), params, ideal_inversion_indices())
}

/// The construction around an arbitrary centrally-symmetric base placement.
pub fn central_deform_from(base: &PeriodicPlacement, params: &CentralParams) -> PeriodicPlacement {
    complete(base, params, &inversion_indices(&base.ring))
}

fn complete(base: &PeriodicPlacement, params: &CentralParams, perm: &[[usize; 4]; 6]) -> PeriodicPlacement {
    let ring = &base.ring;
    let q12 = ring.contact_position(ContactName::Q12);
    let p23 = ring.contact_position(ContactName::P23);
    let mut tetra = ring.tetra;
    tetra[T1M.position()] = ring.tet(T1M).transformed(&RigidMotion::rotation_about(params.r_a, q12));
    tetra[T3M.position()] = ring.tet(T3M).transformed(&RigidMotion::rotation_about(params.r_b, p23));
    let p13 = tetra[T1M.position()].v[ring.contact(ContactName::P13).first.vertex];
    let q13 = tetra[T3M.position()].v[ring.contact(ContactName::Q13).second.vertex];
    let c = (p13 + q13) * 0.5;
    for l in [T1M, T2P, T3M] {
        let src = tetra[l.position()];
        let mut img = Tetrahedron::new([Vec3::ZERO; 4]);
        for i in 0..4 {
            img.v[perm[l.position()][i]] = invert(src.v[i], c);
        }
        tetra[l.opposite().position()] = img;
    }
    let mut p = PeriodicPlacement::from_ring(SixRing::new(tetra, ring.contacts), base.marks);
    p.degenerate = !(p.lattice.det().abs() >= central_degeneracy_threshold());
    p
}

/// Random parameters for sample `index`: an independent ChaCha8 stream per index.
pub fn sample_params(seed: u64, index: u64) -> CentralParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    CentralParams::random(&mut rng)
}

/// `n` placements from uniformly random parameter pairs. Degenerate samples are kept, flagged.
pub fn sample_central(n: usize, seed: u64) -> Vec<PeriodicPlacement> {
    (0..n as u64).map(|i| central_deform(&sample_params(seed, i))).collect()
}

/// Velocities of the placement variables along the six one-parameter subgroups
/// (`e1, e2, e3` for `r_a`, then for `r_b`), by central differences with step `h`.
pub fn central_tangent_basis(h: f64) -> [Vec<f64>; 6] {
    assert!(h > 0.0 && h <= 1e-4, "step must lie in (0, 1e-4]");
    std::array::from_fn(|k| {
        let axis = [Vec3::E1, Vec3::E2, Vec3::E3][k % 3];
        let at = |t: f64| {
            let r = Rotation::from_rotation_vector(axis * t);
            let params = if k < 3 {
                CentralParams { r_a: r, r_b: Rotation::IDENTITY }
            } else {
                CentralParams { r_a: Rotation::IDENTITY, r_b: r }
            };
            placement_variables(&central_deform(&params))
        };
        let (plus, minus) = (at(h), at(-h));
        plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    })
}
