use serde::{Deserialize, Serialize};

use super::{det3, RigidMotion, Vec3};

/// Relative determinant threshold below which a lattice counts as degenerate.
pub const DEGENERATE_REL: f64 = 1e-9;

/// Three generators of a rank-3 translation lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodLattice {
    pub g: [Vec3; 3],
}

impl PeriodLattice {
    pub fn new(g: [Vec3; 3]) -> Self {
        PeriodLattice { g }
    }

    /// Signed determinant of the generator matrix (generators as rows).
    pub fn det(&self) -> f64 {
        det3(self.g[0], self.g[1], self.g[2])
    }

    /// Scale for the degeneracy test: product of the generator norms.
    pub fn norm_product(&self) -> f64 {
        self.g.iter().map(|v| v.norm()).product()
    }

    /// `|det| < 1e-9 · Π|gᵢ|`. Degeneracy is a state of the lattice, not an error.
    pub fn is_degenerate(&self) -> bool {
        !(self.det().abs() >= DEGENERATE_REL * self.norm_product()) || self.norm_product() == 0.0
    }

    /// The lattice point `Σ nᵢ gᵢ`.
    pub fn point(&self, n: [i64; 3]) -> Vec3 {
        self.g[0] * n[0] as f64 + self.g[1] * n[1] as f64 + self.g[2] * n[2] as f64
    }

    /// Real coordinates of `v` in the generator basis. `None` when degenerate.
    pub fn coordinates(&self, v: Vec3) -> Option<[f64; 3]> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let [a, b, c] = self.g;
        // v = x a + y b + z c  ⇒ Cramer's rule on the columns
        Some([det3(v, b, c) / d, det3(a, v, c) / d, det3(a, b, v) / d])
    }

    /// Integer coordinates of `v` if it is a lattice vector within `tol`.
    pub fn integer_coordinates(&self, v: Vec3, tol: f64) -> Option<[i64; 3]> {
        let x = self.coordinates(v)?;
        let n = x.map(|c| c.round() as i64);
        ((self.point(n) - v).norm() <= tol).then_some(n)
    }

    pub fn transformed(&self, m: &RigidMotion) -> PeriodLattice {
        PeriodLattice { g: self.g.map(|v| m.apply_vector(v)) }
    }

    /// New generators `g'ᵢ = Σⱼ m[i][j] gⱼ`.
    pub fn recombined(&self, m: [[i64; 3]; 3]) -> PeriodLattice {
        PeriodLattice { g: m.map(|row| self.point(row)) }
    }

    /// All lattice points with integer coordinates in `[-r, r]³`, origin excluded.
    pub fn shell_points(&self, r: i64) -> Vec<Vec3> {
        let mut out = Vec::new();
        for i in -r..=r {
            for j in -r..=r {
                for k in -r..=r {
                    if (i, j, k) != (0, 0, 0) {
                        out.push(self.point([i, j, k]));
                    }
                }
            }
        }
        out
    }
}

/// Absolute value of the generator determinant (covolume). Zero for dependent generators.
pub fn lattice_volume(l: &PeriodLattice) -> f64 {
    l.det().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::SQRT2;
    use crate::framework::ideal_lattice;
    use proptest::prelude::*;

    #[test]
    fn ideal_volume_is_eight_root_two() {
        let v = lattice_volume(&ideal_lattice());
        assert!((v - 8.0 * SQRT2).abs() < 1e-12);
        assert!((v - 11.313_708_498_984_76).abs() < 1e-9);
    }

    #[test]
    fn standard_basis_has_unit_volume() {
        let l = PeriodLattice::new([Vec3::E1, Vec3::E2, Vec3::E3]);
        assert_eq!(lattice_volume(&l), 1.0);
        assert!(!l.is_degenerate());
    }

    #[test]
    fn dependent_generators_have_zero_volume() {
        let [a, b, _] = ideal_lattice().g;
        let l = PeriodLattice::new([a, b, a + b]);
        assert!(lattice_volume(&l) < 1e-14);
        assert!(l.is_degenerate());
    }

    #[test]
    fn index_two_sublattice() {
        let l = ideal_lattice();
        let [l1, l2, l3] = l.g;
        let s = [l2 + l3, l3 + l1, l1 + l2];
        for i in 0..3 {
            assert!((s[i].norm() - 2.0 * SQRT2).abs() < 1e-12);
            for j in i + 1..3 {
                assert!(s[i].dot(s[j]).abs() < 1e-12);
            }
        }
        let sub = PeriodLattice::new(s);
        assert!((lattice_volume(&sub) / lattice_volume(&l) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn integer_coordinates_round_trip() {
        let l = ideal_lattice();
        let n = [2, -1, 3];
        assert_eq!(l.integer_coordinates(l.point(n), 1e-9), Some(n));
        assert_eq!(l.integer_coordinates(l.point(n) + Vec3::E1 * 0.3, 1e-9), None);
    }

    fn unimodular() -> impl Strategy<Value = [[i64; 3]; 3]> {
        // products of elementary shears and swaps
        prop::collection::vec((0usize..3, 0usize..3, -2i64..=2, any::<bool>()), 1..6).prop_map(|ops| {
            let mut m = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
            for (i, j, k, swap) in ops {
                if swap {
                    m.swap(i, j);
                } else if i != j {
                    for c in 0..3 {
                        m[i][c] += k * m[j][c];
                    }
                }
            }
            m
        })
    }

    fn det_i(m: [[i64; 3]; 3]) -> i64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    proptest! {
        #[test]
        fn volume_invariant_under_permutation_and_sign(p in 0usize..6, s in prop::array::uniform3(any::<bool>())) {
            let l = ideal_lattice();
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let g = perms[p].map(|i| l.g[i]);
            let g = [0, 1, 2].map(|i| if s[i] { -g[i] } else { g[i] });
            prop_assert!((lattice_volume(&PeriodLattice::new(g)) - lattice_volume(&l)).abs() < 1e-12);
        }

        #[test]
        fn volume_scales_by_integer_determinant(m in unimodular(), k in prop::array::uniform3(-3i64..=3)) {
            let l = ideal_lattice();
            // unimodular recombination keeps the volume
            let d = det_i(m);
            prop_assert_eq!(d.abs(), 1);
            let r = l.recombined(m);
            prop_assert!((lattice_volume(&r) - lattice_volume(&l)).abs() < 1e-9 * (1.0 + lattice_volume(&l)));
            // a general integer matrix multiplies it by |det M|
            let mut m2 = m;
            for c in 0..3 { m2[0][c] += k[c]; }
            let d2 = det_i(m2).abs() as f64;
            let r2 = l.recombined(m2);
            prop_assert!((lattice_volume(&r2) - d2 * lattice_volume(&l)).abs() < 1e-8 * (1.0 + d2));
        }
    }
}
