use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Vec3;

/// A rotation stored as a unit quaternion, scalar first: `(w, x, y, z)`.
///
/// The action on vectors is the right-handed one, `v ↦ q v q*`, so a rotation
/// by +90° about `e3` sends `e1` to `e2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for Rotation {
    fn default() -> Self {
        Rotation::IDENTITY
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Builds a rotation from raw quaternion components, normalizing them.
    /// Returns `None` for the zero quaternion or non-finite input.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Option<Rotation> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 1e-300) {
            return None;
        }
        Some(Rotation { w: w / n, x: x / n, y: y / n, z: z / n })
    }

    /// Rotation by `angle` radians about `axis` (right-hand rule).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Rotation {
        let a = axis.normalize();
        let (s, c) = (0.5 * angle).sin_cos();
        Rotation { w: c, x: a.x * s, y: a.y * s, z: a.z * s }
    }

    /// Exponential map: rotation by `|omega|` about `omega`.
    pub fn from_rotation_vector(omega: Vec3) -> Rotation {
        let angle = omega.norm();
        if angle < 1e-300 {
            return Rotation::IDENTITY;
        }
        Rotation::from_axis_angle(omega, angle)
    }

    /// Uniformly distributed rotation: a normalized 4D Gaussian quaternion.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
        loop {
            let w: f64 = rng.sample(StandardNormal);
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            if let Some(r) = Rotation::from_quaternion(w, x, y, z) {
                return r;
            }
        }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn inverse(&self) -> Rotation {
        Rotation { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, o: &Rotation) -> Rotation {
        let (a, b) = (self, o);
        let q = Rotation {
            w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        };
        // renormalize so long products stay on the unit sphere
        let n = q.norm();
        Rotation { w: q.w / n, x: q.x / n, y: q.y / n, z: q.z / n }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        // v' = v + 2w (u × v) + 2 u × (u × v), u = vector part
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// Row-major 3×3 rotation matrix.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let c0 = self.apply(Vec3::E1);
        let c1 = self.apply(Vec3::E2);
        let c2 = self.apply(Vec3::E3);
        [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]]
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w.abs())
    }
}

/// `x ↦ rotation(x) + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct RigidMotion {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl RigidMotion {
    pub const IDENTITY: RigidMotion = RigidMotion { rotation: Rotation::IDENTITY, translation: Vec3::ZERO };

    pub fn new(rotation: Rotation, translation: Vec3) -> Self {
        RigidMotion { rotation, translation }
    }

    pub fn translation(t: Vec3) -> Self {
        RigidMotion::new(Rotation::IDENTITY, t)
    }

    /// Rotation about an arbitrary fixed point.
    pub fn rotation_about(rotation: Rotation, fixed: Vec3) -> Self {
        RigidMotion::new(rotation, fixed - rotation.apply(fixed))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_shift: f64) -> Self {
        let t = Vec3::new(
            rng.random_range(-max_shift..=max_shift),
            rng.random_range(-max_shift..=max_shift),
            rng.random_range(-max_shift..=max_shift),
        );
        RigidMotion::new(Rotation::random(rng), t)
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation.apply(p) + self.translation
    }

    /// Free vectors only feel the rotational part.
    pub fn apply_vector(&self, v: Vec3) -> Vec3 {
        self.rotation.apply(v)
    }

    pub fn inverse(&self) -> RigidMotion {
        let r = self.rotation.inverse();
        RigidMotion::new(r, -r.apply(self.translation))
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &RigidMotion) -> RigidMotion {
        RigidMotion::new(self.rotation.compose(&o.rotation), self.apply(o.translation))
    }
}
