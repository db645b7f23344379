//! D₃-symmetric rings: a generating edge on two circumsphere-intersection circles, completion by
//! three reflections, the periodicity condition, the tilt curve and the centro+D₃ family.
//!
//! Parameters: `rho` is the circumradius of the regular barycenter hexagon (1 at the ideal
//! placement), `phi` the angle of the contact `P13` on its circle, and the branch picks the
//! root for `Q12` on the second circle and the mirror image of the reconstructed tetrahedron.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::consts::{circumradius, ring_center, EDGE, HALF_EDGE, SOLVER_TOL};
use crate::error::{Error, Result};
use crate::framework::{
    detect_period_marks, ideal_sodalite, sodalite_cage, validate_placement, ContactName, PeriodicPlacement, RingLabel,
    Sign, SixRing,
};
use crate::geom::{reflect, RigidMotion, Tetrahedron, Vec3};
use crate::rigidity::placement_variables;
use crate::roots::{bracketed_root, wrap_angle};
use crate::symmetry::{central_symmetry_residual, d3_residual, fitted_d3_frame};

const T1M: RingLabel = RingLabel::new(1, Sign::Minus);
const T2M: RingLabel = RingLabel::new(2, Sign::Minus);
const T3P: RingLabel = RingLabel::new(3, Sign::Plus);

/// Tolerance on `phi` for the root finders.
pub const PHI_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mirror {
    M12,
    M13,
    M23,
}

impl Mirror {
    fn index(self) -> usize {
        self as usize
    }

    /// The plane containing a contact of a D₃-symmetric ring.
    pub fn of_contact(c: ContactName) -> Mirror {
        match c {
            ContactName::P12 | ContactName::Q12 => Mirror::M12,
            ContactName::P13 | ContactName::Q13 => Mirror::M13,
            ContactName::P23 | ContactName::Q23 => Mirror::M23,
        }
    }
}

/// Common axis, hexagon center and the three mirror normals `Π12, Π13, Π23`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct D3Frame {
    pub center: Vec3,
    pub axis: Vec3,
    pub normals: [Vec3; 3],
}

impl D3Frame {
    /// Axis `(1,1,1)/√3` through `(1,1,1)/√2`; normals `(1,−1,0)/√2`, `(1,0,−1)/√2`, `(0,1,−1)/√2`.
    pub fn ideal() -> D3Frame {
        D3Frame {
            center: ring_center(),
            axis: Vec3::splat(1.0).normalize(),
            normals: [Vec3::new(1.0, -1.0, 0.0), Vec3::new(1.0, 0.0, -1.0), Vec3::new(0.0, 1.0, -1.0)]
                .map(Vec3::normalize),
        }
    }

    pub fn normal(&self, m: Mirror) -> Vec3 {
        self.normals[m.index()]
    }

    pub fn reflect(&self, m: Mirror, p: Vec3) -> Vec3 {
        reflect(p, self.center, self.normal(m))
    }

    pub fn reflect_tet(&self, m: Mirror, t: &Tetrahedron) -> Tetrahedron {
        t.map(|p| self.reflect(m, p))
    }

    pub fn transformed(&self, g: &RigidMotion) -> D3Frame {
        D3Frame {
            center: g.apply(self.center),
            axis: g.apply_vector(self.axis),
            normals: self.normals.map(|n| g.apply_vector(n)),
        }
    }

    /// The six ring tetrahedra generated from `T1⁻` by the reflections.
    pub fn complete_ring(&self, t1m: &Tetrahedron) -> [Tetrahedron; 6] {
        let t3p = self.reflect_tet(Mirror::M13, t1m);
        let t2p = self.reflect_tet(Mirror::M12, t1m);
        let t2m = self.reflect_tet(Mirror::M23, &t3p);
        let t3m = self.reflect_tet(Mirror::M23, &t2p);
        let t1p = self.reflect_tet(Mirror::M12, &t2m);
        // ring order T1-, T3+, T2-, T1+, T3-, T2+
        [*t1m, t3p, t2m, t1p, t3m, t2p]
    }

    /// Barycenters of a regular hexagon of circumradius `rho`, in ring order.
    pub fn barycenters(&self, rho: f64) -> [Vec3; 6] {
        let b = self.center - self.normal(Mirror::M23) * rho;
        let t = Tetrahedron::new([b; 4]);
        self.complete_ring(&t).map(|t| t.v[0])
    }

    /// Rotation by π about the hexagon diameter through the `T1⁻` barycenter.
    pub fn half_turn(&self, p: Vec3) -> Vec3 {
        let d = -self.normal(Mirror::M23);
        let q = p - self.center;
        self.center + d * (2.0 * q.dot(d)) - q
    }
}

/// A circle in 3D: `center + radius (cos s · u + sin s · w)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Circle {
    pub center: Vec3,
    pub radius: f64,
    /// Unit normal of the circle's plane.
    pub normal: Vec3,
    pub u: Vec3,
    pub w: Vec3,
}

impl Circle {
    pub fn point(&self, s: f64) -> Vec3 {
        let (sn, cs) = s.sin_cos();
        self.center + (self.u * cs + self.w * sn) * self.radius
    }

    /// Angle of the projection of `p` onto the circle's plane.
    pub fn angle_of(&self, p: Vec3) -> f64 {
        let d = p - self.center;
        d.dot(self.w).atan2(d.dot(self.u))
    }

    /// Distance of `p` from the circle.
    pub fn distance(&self, p: Vec3) -> f64 {
        let d = p - self.center;
        let h = d.dot(self.normal);
        let inplane = (d - self.normal * h).norm();
        (h * h + (inplane - self.radius).powi(2)).sqrt()
    }
}

/// Points at circumradius distance from both barycenters of a consecutive pair, one circle per
/// contact (in contact order). `None` where the two circumspheres do not meet.
pub fn contact_circles(frame: &D3Frame, rho: f64) -> [Option<Circle>; 6] {
    let bs = frame.barycenters(rho);
    let rc = circumradius();
    ContactName::ALL.map(|name| {
        let k = name.position();
        let (b0, b1) = (bs[k], bs[(k + 1) % 6]);
        let half = 0.5 * b0.distance(b1);
        let r2 = rc * rc - half * half;
        if !(r2 >= 0.0) {
            return None;
        }
        let n = frame.normal(Mirror::of_contact(name));
        Some(Circle { center: (b0 + b1) * 0.5, radius: r2.sqrt(), normal: n, u: frame.axis, w: n.cross(frame.axis) })
    })
}

/// Choice of the `Q12` root (`±1`) and of the mirror image of the reconstructed `T1⁻` (`±1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct D3Branch {
    pub root: i8,
    pub mirror: i8,
}

impl D3Branch {
    pub const IDEAL: D3Branch = D3Branch { root: 1, mirror: 1 };
}

/// Segments of length `2(√2−1)` from circle `P13` (at angle `phi`) to circle `Q12`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratingEdgeFamily {
    pub rho: f64,
    pub p_circle: Circle,
    pub q_circle: Circle,
    /// Feasible `phi` arcs `(lo, hi)` with `lo < hi` (`hi` may exceed π).
    pub intervals: Vec<(f64, f64)>,
}

impl GeneratingEdgeFamily {
    /// `cos(t − t0)` required for the second endpoint; feasible iff in `[−1, 1]`.
    pub fn cos_offset(&self, phi: f64) -> f64 {
        let (a, b) = (&self.p_circle, &self.q_circle);
        let d = a.point(phi) - b.center;
        let g = d.dot(b.u).hypot(d.dot(b.w));
        (d.norm_squared() + b.radius * b.radius - EDGE * EDGE) / (2.0 * b.radius * g)
    }

    pub fn is_feasible(&self, phi: f64) -> bool {
        self.cos_offset(phi).abs() <= 1.0
    }

    /// Endpoints `(P13, Q12)`, or `None` outside the feasible set.
    pub fn edge(&self, phi: f64, root: i8) -> Option<(Vec3, Vec3)> {
        let (a, b) = (&self.p_circle, &self.q_circle);
        let p = a.point(phi);
        let d = p - b.center;
        let t0 = d.dot(b.w).atan2(d.dot(b.u));
        let c = self.cos_offset(phi);
        if !(c.abs() <= 1.0 + 1e-12) {
            return None;
        }
        let t = t0 + root as f64 * c.clamp(-1.0, 1.0).acos();
        Some((p, b.point(t)))
    }
}

const FEASIBILITY_SAMPLES: usize = 2048;

/// The one-parameter family of generating edges at hexagon size `rho`.
pub fn solve_generating_edge(frame: &D3Frame, rho: f64) -> Result<GeneratingEdgeFamily> {
    if !(rho > 0.0) {
        return Err(Error::Infeasible(format!("rho = {rho} must be positive")));
    }
    let circles = contact_circles(frame, rho);
    let (Some(p_circle), Some(q_circle)) = (circles[ContactName::P13.position()], circles[ContactName::Q12.position()])
    else {
        return Err(Error::Infeasible(format!("rho = {rho}: circumspheres of consecutive tetrahedra are disjoint")));
    };
    let fam = GeneratingEdgeFamily { rho, p_circle, q_circle, intervals: Vec::new() };
    let n = FEASIBILITY_SAMPLES;
    let grid: Vec<f64> = (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect();
    let ok: Vec<bool> = grid.iter().map(|&s| fam.is_feasible(s)).collect();
    if ok.iter().all(|&b| b) {
        return Ok(GeneratingEdgeFamily { intervals: vec![(-PI, PI)], ..fam });
    }
    let step = 2.0 * PI / n as f64;
    let refine = |inside: f64, outside: f64| -> f64 {
        let (mut i, mut o) = (inside, outside);
        for _ in 0..60 {
            let m = 0.5 * (i + o);
            if fam.is_feasible(m) {
                i = m;
            } else {
                o = m;
            }
        }
        i
    };
    // start just after an infeasible sample so arcs never straddle the scan origin
    let first_bad = ok.iter().position(|&b| !b).unwrap();
    let mut intervals = Vec::new();
    let mut k = 0;
    while k < n {
        let i = (first_bad + k) % n;
        if ok[i] {
            let mut j = k;
            while j + 1 < n && ok[(first_bad + j + 1) % n] {
                j += 1;
            }
            let s_start = grid[first_bad] + k as f64 * step;
            let s_end = grid[first_bad] + j as f64 * step;
            let lo = refine(s_start, s_start - step);
            let hi = refine(s_end, s_end + step);
            let shift = -2.0 * PI * ((lo + PI) / (2.0 * PI)).floor();
            intervals.push((lo + shift, hi + shift));
            k = j + 1;
        } else {
            k += 1;
        }
    }
    if intervals.is_empty() {
        return Err(Error::Infeasible(format!("rho = {rho}: no generating edge of the required length")));
    }
    Ok(GeneratingEdgeFamily { intervals, ..fam })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct D3RingParams {
    pub rho: f64,
    pub phi: f64,
    pub branch: D3Branch,
}

impl D3RingParams {
    /// Parameters of the ideal ring: `rho = 1` and the angle of the ideal `P13`.
    pub fn ideal() -> D3RingParams {
        static P: OnceLock<D3RingParams> = OnceLock::new();
        *P.get_or_init(|| {
            let fam = solve_generating_edge(&D3Frame::ideal(), 1.0).expect("rho = 1 is feasible");
            let p13 = ideal_sodalite().ring.contact_position(ContactName::P13);
            D3RingParams { rho: 1.0, phi: fam.p_circle.angle_of(p13), branch: D3Branch::IDEAL }
        })
    }
}

/// Regular tetrahedron `[P, X, Q, Y]` with barycenter `b` and edge `PQ`; `mirror` picks which
/// of the two remaining positions is `X`.
pub fn reconstruct_tetrahedron(b: Vec3, p: Vec3, q: Vec3, mirror: i8) -> Result<Tetrahedron> {
    let rc = circumradius();
    let defects = [(p.distance(q) - EDGE).abs(), (p.distance(b) - rc).abs(), (q.distance(b) - rc).abs()];
    if defects.iter().any(|d| !(*d <= 1e-9)) {
        return Err(Error::Reconstruction(format!(
            "assigned vertices inconsistent with a regular tetrahedron (defects {:.3e}, {:.3e}, {:.3e})",
            defects[0], defects[1], defects[2]
        )));
    }
    let m = (p + q) * 0.5;
    let mo = b * 2.0 - m;
    let d = (q - p)
        .cross(mo - m)
        .try_normalize()
        .ok_or_else(|| Error::Reconstruction("edge passes through the barycenter".into()))?;
    let x = mo + d * (HALF_EDGE * mirror as f64);
    let y = mo - d * (HALF_EDGE * mirror as f64);
    Ok(Tetrahedron::new([p, x, q, y]))
}

fn t1_minus(frame: &D3Frame, fam: &GeneratingEdgeFamily, phi: f64, branch: D3Branch) -> Result<Tetrahedron> {
    let (p, q) = fam
        .edge(phi, branch.root)
        .ok_or_else(|| Error::Infeasible(format!("phi = {phi} outside the feasible set at rho = {}", fam.rho)))?;
    reconstruct_tetrahedron(frame.barycenters(fam.rho)[0], p, q, branch.mirror)
}

/// D₃-symmetric ring in the ideal frame.
pub fn build_d3_ring(params: &D3RingParams) -> Result<SixRing> {
    build_d3_ring_in(&D3Frame::ideal(), params)
}

pub fn build_d3_ring_in(frame: &D3Frame, params: &D3RingParams) -> Result<SixRing> {
    let fam = solve_generating_edge(frame, params.rho)?;
    let t = t1_minus(frame, &fam, params.phi, params.branch)?;
    Ok(SixRing::new(frame.complete_ring(&t), ideal_sodalite().ring.contacts))
}

/// Ring plus the ideal period marks, lattice read off the marks.
pub fn d3_placement(params: &D3RingParams) -> Result<PeriodicPlacement> {
    Ok(PeriodicPlacement::from_ring(build_d3_ring(params)?, ideal_sodalite().marks))
}

/// The marked period from `T2⁻` to `T1⁻` as `(source, target)` vertex indices.
fn designated_period() -> (usize, usize) {
    let m = ideal_sodalite()
        .marks
        .into_iter()
        .find(|m| m.source.label == T2M && m.target.label == T1M)
        .expect("the ideal ring has a T2- to T1- period");
    (m.source.vertex, m.target.vertex)
}

/// Component of the `T2⁻ → T1⁻` period along the normal of `Π12` fitted to the ring.
/// Zero iff the period is parallel to the mirror plane.
pub fn periodicity_residual(r: &SixRing) -> f64 {
    let (_, _, normals, _) = fitted_d3_frame(r);
    let (s, t) = designated_period();
    (r.tet(T1M).v[t] - r.tet(T2M).v[s]).dot(normals[0])
}

/// The same quantity against a known frame, from `T1⁻` alone.
fn frame_residual(frame: &D3Frame, t1m: &Tetrahedron) -> f64 {
    let (s, t) = designated_period();
    let t2m = frame.reflect_tet(Mirror::M23, &frame.reflect_tet(Mirror::M13, t1m));
    (t1m.v[t] - t2m.v[s]).dot(frame.normal(Mirror::M12))
}

/// A zero of the periodicity residual at fixed `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct D3Root {
    pub phi: f64,
    pub root: i8,
}

const LOOP_SAMPLES: usize = 1024;
/// Largest periodicity residual accepted at a root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// Roots whose `T1⁻` differ by less than this are the same root.
const ROOT_DEDUP_TOL: f64 = 1e-6;
const WINDOW_SAMPLES: usize = 256;
const WINDOWS: [f64; 5] = [0.3, 3e-2, 3e-3, 3e-4, 3e-5];

/// All zeros of the periodicity residual found by scanning each feasible arc as a closed loop
/// (root `+1` out, root `−1` back, joined at the folds), plus nested windows around `hint`.
pub fn periodic_roots(frame: &D3Frame, rho: f64, mirror: i8, hint: Option<f64>) -> Vec<D3Root> {
    let Ok(fam) = solve_generating_edge(frame, rho) else {
        return Vec::new();
    };
    let f = |phi: f64, root: i8| -> Option<f64> {
        let t = t1_minus(frame, &fam, phi, D3Branch { root, mirror }).ok()?;
        Some(frame_residual(frame, &t))
    };
    let mut found: Vec<(D3Root, Tetrahedron)> = Vec::new();
    let push = |r: D3Root, found: &mut Vec<(D3Root, Tetrahedron)>| {
        let Ok(t) = t1_minus(frame, &fam, r.phi, D3Branch { root: r.root, mirror }) else { return };
        if !(frame_residual(frame, &t).abs() < ROOT_RESIDUAL_TOL) {
            return;
        }
        if !found.iter().any(|(_, s)| s.max_vertex_distance(&t) < ROOT_DEDUP_TOL) {
            found.push((r, t));
        }
    };
    for &(lo, hi) in &fam.intervals {
        let full = hi - lo >= 2.0 * PI - 1e-12;
        // loop parameter u ∈ [0, 2]
        let at = |u: f64| -> D3Root {
            if u <= 1.0 {
                D3Root { phi: lo + u * (hi - lo), root: 1 }
            } else {
                D3Root { phi: hi - (u - 1.0) * (hi - lo), root: -1 }
            }
        };
        let g = |u: f64| f(at(u).phi, at(u).root).unwrap_or(f64::NAN);
        let segments: &[(f64, f64)] = if full { &[(0.0, 1.0), (1.0, 2.0)] } else { &[(0.0, 2.0)] };
        for &(u0, u1) in segments {
            let m = LOOP_SAMPLES;
            let us: Vec<f64> = (0..=m).map(|i| u0 + (u1 - u0) * i as f64 / m as f64).collect();
            let vs: Vec<f64> = us.iter().map(|&u| g(u)).collect();
            for i in 0..m {
                if vs[i].is_finite() && vs[i + 1].is_finite() && vs[i] * vs[i + 1] <= 0.0 {
                    let scale = (hi - lo).abs().max(1.0);
                    if let Some(u) = bracketed_root(g, us[i], us[i + 1], PHI_TOL / scale) {
                        push(at(u), &mut found);
                    }
                }
            }
        }
    }
    if let Some(h) = hint {
        for w in WINDOWS {
            for root in [1i8, -1] {
                let n = WINDOW_SAMPLES;
                let ps: Vec<f64> = (0..=n).map(|i| h - w + 2.0 * w * i as f64 / n as f64).collect();
                let vs: Vec<f64> = ps.iter().map(|&p| f(p, root).unwrap_or(f64::NAN)).collect();
                for i in 0..n {
                    if vs[i].is_finite() && vs[i + 1].is_finite() && vs[i] * vs[i + 1] <= 0.0 {
                        let gphi = |p: f64| f(p, root).unwrap_or(f64::NAN);
                        if let Some(p) = bracketed_root(gphi, ps[i], ps[i + 1], PHI_TOL) {
                            push(D3Root { phi: p, root }, &mut found);
                        }
                    }
                }
            }
        }
    }
    found.into_iter().map(|(r, _)| r).collect()
}

/// `d3_residual < tol` and `central_symmetry_residual > 10·tol`.
pub fn detect_tetrahedrite(p: &PeriodicPlacement, tol: f64) -> bool {
    d3_residual(&p.ring).value < tol && central_symmetry_residual(&p.ring).value > 10.0 * tol
}

/// Tolerance used for the tetrahedrite flag along traced curves.
pub const TETRAHEDRITE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltPoint {
    pub rho: f64,
    pub phi: f64,
    pub branch: D3Branch,
    #[serde(skip)]
    pub placement: PeriodicPlacement,
    pub lattice_volume: f64,
    pub central_residual: f64,
    pub d3_residual: f64,
    pub periodicity_residual: f64,
    pub tetrahedrite: bool,
    /// Largest change of a pairwise cage-barycenter distance relative to the ideal cage.
    pub cage_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StopReason {
    MaxSteps,
    /// The hexagon shrank to a point.
    RhoExhausted,
    NoRoot {
        rho: f64,
    },
    /// The nearest root is too far from the extrapolated position.
    Jump {
        rho: f64,
        distance: f64,
    },
    Invalid {
        rho: f64,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltTrace {
    pub direction: i8,
    pub step: f64,
    pub points: Vec<TiltPoint>,
    pub stop: StopReason,
    /// Max vertex displacement between consecutive points divided by the step.
    pub max_displacement_ratio: f64,
}

/// Largest accepted distance between a root's `T1⁻` and the linear extrapolation.
const JUMP_LIMIT: f64 = 0.2;

fn ideal_cage_spectrum() -> &'static Vec<f64> {
    static S: OnceLock<Vec<f64>> = OnceLock::new();
    S.get_or_init(|| sodalite_cage(&ideal_sodalite()).expect("ideal is valid").distance_spectrum())
}

fn tilt_point(params: &D3RingParams) -> std::result::Result<TiltPoint, String> {
    let p = d3_placement(params).map_err(|e| e.to_string())?;
    let report = validate_placement(&p, SOLVER_TOL);
    if !report.passed() {
        return Err(report.to_string());
    }
    let redetected = detect_period_marks(&p.ring, &p.lattice, SOLVER_TOL).map_err(|e| e.to_string())?;
    if redetected != p.marks {
        return Err("period marks changed along the curve".into());
    }
    let cage = sodalite_cage(&p).map_err(|e| e.to_string())?;
    let cage_deviation =
        cage.distance_spectrum().iter().zip(ideal_cage_spectrum()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(TiltPoint {
        rho: params.rho,
        phi: params.phi,
        branch: params.branch,
        lattice_volume: p.volume(),
        central_residual: central_symmetry_residual(&p.ring).value,
        d3_residual: d3_residual(&p.ring).value,
        periodicity_residual: periodicity_residual(&p.ring),
        tetrahedrite: detect_tetrahedrite(&p, TETRAHEDRITE_TOL),
        cage_deviation,
        placement: p,
    })
}

/// Continuation of the periodic D₃ rings from the ideal placement, lowering `rho` by `step`
/// each time. The ideal placement is a fold of this curve: both halves have `rho < 1`.
/// `direction = +1` follows the half whose first root has the larger `phi` (relative to the
/// centrally-symmetric root at the same `rho`), `−1` the other.
pub fn trace_tilt_curve(step: f64, max_steps: usize, direction: i8) -> TiltTrace {
    assert!(step > 0.0, "step must be positive");
    assert!(direction == 1 || direction == -1, "direction must be +1 or -1");
    let frame = D3Frame::ideal();
    let ideal = D3RingParams::ideal();
    let branch = ideal.branch;
    let mut points = vec![tilt_point(&ideal).expect("the ideal ring is valid")];
    let mut history: Vec<Tetrahedron> = vec![*points[0].placement.ring.tet(T1M)];
    let mut stop = StopReason::MaxSteps;
    let mut phi = ideal.phi;
    for k in 1..=max_steps {
        let rho = 1.0 - k as f64 * step;
        if rho <= 0.0 {
            stop = StopReason::RhoExhausted;
            break;
        }
        let fam = solve_generating_edge(&frame, rho);
        let roots = periodic_roots(&frame, rho, branch.mirror, Some(phi));
        let Ok(fam) = fam else {
            stop = StopReason::NoRoot { rho };
            break;
        };
        let t1 = |r: &D3Root| t1_minus(&frame, &fam, r.phi, D3Branch { root: r.root, mirror: branch.mirror }).ok();
        let choice = if k == 1 {
            first_root(&frame, &fam, &roots, ideal.phi, direction, branch)
        } else {
            let n = history.len();
            let pred = Tetrahedron::new(std::array::from_fn(|i| history[n - 1].v[i] * 2.0 - history[n - 2].v[i]));
            let best = roots
                .iter()
                .filter_map(|r| Some((*r, t1(r)?.max_vertex_distance(&pred))))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((r, d)) if d <= JUMP_LIMIT => Some(r),
                Some((_, d)) => {
                    stop = StopReason::Jump { rho, distance: d };
                    break;
                }
                None => None,
            }
        };
        let Some(r) = choice else {
            stop = StopReason::NoRoot { rho };
            break;
        };
        let params =
            D3RingParams { rho, phi: wrap_angle(r.phi), branch: D3Branch { root: r.root, mirror: branch.mirror } };
        match tilt_point(&params) {
            Ok(pt) => {
                history.push(*pt.placement.ring.tet(T1M));
                phi = pt.phi;
                points.push(pt);
            }
            Err(message) => {
                stop = StopReason::Invalid { rho, message };
                break;
            }
        }
    }
    let max_displacement_ratio = points
        .windows(2)
        .map(|w| w[0].placement.ring.max_vertex_distance(&w[1].placement.ring) / step)
        .fold(0.0, f64::max);
    TiltTrace { direction, step, points, stop, max_displacement_ratio }
}

/// Among the roots near the ideal angle with the ideal branch, the one closest to the
/// centrally-symmetric root on the requested side.
fn first_root(
    frame: &D3Frame,
    fam: &GeneratingEdgeFamily,
    roots: &[D3Root],
    phi0: f64,
    direction: i8,
    branch: D3Branch,
) -> Option<D3Root> {
    let cands: Vec<(D3Root, f64)> = roots
        .iter()
        .filter(|r| r.root == branch.root && wrap_angle(r.phi - phi0).abs() < 1.0)
        .filter_map(|r| {
            let t = t1_minus(frame, fam, r.phi, branch).ok()?;
            let ring = SixRing::new(frame.complete_ring(&t), ideal_sodalite().ring.contacts);
            Some((*r, central_symmetry_residual(&ring).value))
        })
        .collect();
    let centro = cands.iter().min_by(|a, b| a.1.total_cmp(&b.1))?.0;
    cands
        .iter()
        .map(|(r, _)| *r)
        .filter(|r| wrap_angle(r.phi - centro.phi) * direction as f64 > 0.0)
        .min_by(|a, b| wrap_angle(a.phi - centro.phi).abs().total_cmp(&wrap_angle(b.phi - centro.phi).abs()))
}

/// Largest step used when following the centro+D₃ family away from `rho = 1`.
pub const CENTRO_MAX_STEP: f64 = 0.005;

/// The centro+D₃ ring at hexagon size `rho` and its parameter `phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct CentroD3 {
    pub rho: f64,
    pub phi: f64,
    pub placement: PeriodicPlacement,
}

/// Rings with both D₃ and central symmetry: the generating edge `P13 Q12` is bisected
/// perpendicularly by the hexagon diameter through the `T1⁻` barycenter, i.e. `Q12` is the
/// half-turn image of `P13`. Followed continuously from the ideal ring at `rho = 1`.
pub fn build_centro_d3_ring(rho: f64) -> Result<CentroD3> {
    let frame = D3Frame::ideal();
    let ideal = D3RingParams::ideal();
    let n = ((rho - 1.0).abs() / CENTRO_MAX_STEP).ceil().max(1.0) as usize;
    let mut phi = ideal.phi;
    for k in 1..=n {
        let r = 1.0 + (rho - 1.0) * k as f64 / n as f64;
        let fam = solve_generating_edge(&frame, r)?;
        let h = |s: f64| {
            let p = fam.p_circle.point(s);
            p.distance(frame.half_turn(p)) - EDGE
        };
        phi = nearest_root(h, phi).ok_or_else(|| Error::Infeasible(format!("centro+D3 family lost at rho = {r}")))?;
    }
    let fam = solve_generating_edge(&frame, rho)?;
    let p = fam.p_circle.point(phi);
    let q = frame.half_turn(p);
    let t = reconstruct_tetrahedron(frame.barycenters(rho)[0], p, q, ideal.branch.mirror)?;
    let ring = SixRing::new(frame.complete_ring(&t), ideal_sodalite().ring.contacts);
    let placement = PeriodicPlacement::from_ring(ring, ideal_sodalite().marks);
    Ok(CentroD3 { rho, phi, placement })
}

/// Sign-bracketed root of `h` closest to `start`, searching outward in growing windows.
fn nearest_root(h: impl Fn(f64) -> f64, start: f64) -> Option<f64> {
    let mut w = 1e-3;
    while w <= PI {
        let n = 64;
        let xs: Vec<f64> = (0..=n).map(|i| start - w + 2.0 * w * i as f64 / n as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
        let best = (0..n)
            .filter(|&i| vs[i].is_finite() && vs[i + 1].is_finite() && vs[i] * vs[i + 1] <= 0.0)
            .filter_map(|i| bracketed_root(&h, xs[i], xs[i + 1], PHI_TOL))
            .min_by(|a, b| (a - start).abs().total_cmp(&(b - start).abs()));
        if best.is_some() {
            return best;
        }
        w *= 2.0;
    }
    None
}

/// For each pair of opposite tetrahedra and each of the edges `(0,2)` and `(1,3)`: how far the
/// perpendicular bisecting planes of the two matching edges are from coinciding
/// (max of the normal mismatch and the offset mismatch).
pub fn distant_edge_bisector_defect(r: &SixRing) -> f64 {
    let plane = |a: Vec3, b: Vec3| {
        let n = (b - a).normalize();
        (n, n.dot((a + b) * 0.5))
    };
    let mut worst: f64 = 0.0;
    for l in [T1M, T2M, T3P] {
        let (s, t) = (r.tet(l), r.tet(l.opposite()));
        for (i, j) in [(0, 2), (1, 3)] {
            let (n1, d1) = plane(s.v[i], s.v[j]);
            let (mut n2, mut d2) = plane(t.v[i], t.v[j]);
            if n1.dot(n2) < 0.0 {
                n2 = -n2;
                d2 = -d2;
            }
            worst = worst.max((n1 - n2).norm()).max((d1 - d2).abs());
        }
    }
    worst
}

/// Ring of a known D₃ frame: mismatch of each reflected tetrahedron with its partner (index-wise).
pub fn frame_reflection_mismatch(frame: &D3Frame, r: &SixRing) -> f64 {
    let pairs = crate::symmetry::mirror_pairings();
    let mut worst: f64 = 0.0;
    for (k, m) in [Mirror::M12, Mirror::M13, Mirror::M23].into_iter().enumerate() {
        for l in RingLabel::RING_ORDER {
            let img = pairs[k].apply(l).expect("transpositions stabilize the ring");
            worst = worst.max(frame.reflect_tet(m, r.tet(l)).max_vertex_distance(r.tet(img)));
        }
    }
    worst
}

/// Barycenter hexagon of a ring: circumradius about its centroid.
pub fn hexagon_radius(r: &SixRing) -> f64 {
    let bs = r.barycenters();
    let c = bs.iter().copied().sum::<Vec3>() / 6.0;
    bs.iter().map(|b| b.distance(c)).sum::<f64>() / 6.0
}

/// Tangent of the tilt curve at the ideal placement in placement variables, unit length.
/// The ideal placement is a fold in `rho`, so the first points of the two directions at
/// `rho = 1 − h` are symmetric about it and their difference is tangent up to `O(h)`.
pub fn tilt_tangent(h: f64) -> Result<Vec<f64>> {
    let first = |dir: i8| {
        let t = trace_tilt_curve(h, 1, dir);
        t.points.get(1).map(|p| placement_variables(&p.placement)).ok_or_else(|| {
            Error::Infeasible(format!("tilt curve does not leave the ideal placement at step {h}: {:?}", t.stop))
        })
    };
    let (plus, minus) = (first(1)?, first(-1)?);
    let d: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
    let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(d.into_iter().map(|x| x / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::central::{central_deform, sample_params};
    use crate::framework::{validate_placement, CheckKind};
    use crate::rigidity::{build_constraint_system, jacobian_image_norm};

    fn ideal_frame_normals_at_sixty_degrees() -> bool {
        let f = D3Frame::ideal();
        let ang = |a: Vec3, b: Vec3| a.dot(b).abs().acos();
        [(0, 1), (0, 2), (1, 2)].iter().all(|&(i, j)| (ang(f.normals[i], f.normals[j]) - PI / 3.0).abs() < 1e-12)
            && f.normals.iter().all(|n| n.dot(f.axis).abs() < 1e-15)
    }

    #[test]
    fn frame_planes_share_the_axis() {
        assert!(ideal_frame_normals_at_sixty_degrees());
    }

    #[test]
    fn ideal_barycenters_match() {
        let bs = D3Frame::ideal().barycenters(1.0);
        let ideal = ideal_sodalite().ring.barycenters();
        for k in 0..6 {
            assert!(bs[k].distance(ideal[k]) < 1e-14, "{k}");
        }
    }

    #[test]
    fn circles_hold_the_ideal_contacts() {
        let ring = ideal_sodalite().ring;
        let circles = contact_circles(&D3Frame::ideal(), 1.0);
        for (k, c) in ContactName::ALL.into_iter().enumerate() {
            let circle = circles[k].expect("spheres meet at rho = 1");
            assert!(circle.distance(ring.contact_position(c)) < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn circles_vanish_beyond_the_separation_bound() {
        // consecutive barycenters are rho apart; the spheres separate past twice the circumradius
        let bound = 2.0 * circumradius();
        let f = D3Frame::ideal();
        assert!(contact_circles(&f, bound * (1.0 - 1e-9)).iter().all(Option::is_some));
        assert!(contact_circles(&f, bound * (1.0 + 1e-9)).iter().all(Option::is_none));
    }

    #[test]
    fn circles_are_exchanged_by_the_mirrors() {
        let f = D3Frame::ideal();
        let cs = contact_circles(&f, 0.8).map(Option::unwrap);
        let pairs = crate::symmetry::mirror_pairings();
        for (k, m) in [Mirror::M12, Mirror::M13, Mirror::M23].into_iter().enumerate() {
            for c in ContactName::ALL {
                let (a, b) = c.labels();
                let (a, b) = (pairs[k].apply(a).unwrap(), pairs[k].apply(b).unwrap());
                let img = ContactName::ALL.into_iter().find(|d| d.labels() == (a, b) || d.labels() == (b, a)).unwrap();
                let (src, dst) = (cs[c.position()], cs[img.position()]);
                assert!(f.reflect(m, src.center).distance(dst.center) < 1e-14);
                assert!((src.radius - dst.radius).abs() < 1e-14);
                let n = f.reflect(m, f.center + src.normal) - f.center;
                assert!(n.cross(dst.normal).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn family_contains_the_ideal_edge() {
        let fam = solve_generating_edge(&D3Frame::ideal(), 1.0).unwrap();
        let ip = D3RingParams::ideal();
        let (p, q) = fam.edge(ip.phi, 1).unwrap();
        let ring = ideal_sodalite().ring;
        assert!(p.distance(ring.contact_position(ContactName::P13)) < 1e-9);
        assert!(q.distance(ring.contact_position(ContactName::Q12)) < 1e-9);
        assert!((ip.phi - -2.526112944919406).abs() < 1e-9);
    }

    #[test]
    fn family_edges_have_the_tetrahedron_edge_length() {
        let f = D3Frame::ideal();
        for rho in [0.3, 0.8, 1.0, 1.005] {
            let fam = solve_generating_edge(&f, rho).unwrap();
            for &(lo, hi) in &fam.intervals {
                for i in 0..=50 {
                    let phi = lo + (hi - lo) * i as f64 / 50.0;
                    for root in [1, -1] {
                        let (p, q) = fam.edge(phi, root).unwrap();
                        assert!((p.distance(q) - EDGE).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn family_is_empty_for_large_hexagons() {
        let f = D3Frame::ideal();
        let mut rho: f64 = 1.0;
        while solve_generating_edge(&f, rho).is_ok() {
            rho += 1e-3;
            assert!(rho < 2.0 * circumradius());
        }
        assert!(matches!(solve_generating_edge(&f, rho), Err(Error::Infeasible(_))));
        assert!(solve_generating_edge(&f, 1.1).is_err());
        assert!(solve_generating_edge(&f, -1.0).is_err());
    }

    #[test]
    fn ideal_parameters_rebuild_the_ideal_ring() {
        let r = build_d3_ring(&D3RingParams::ideal()).unwrap();
        assert!(r.max_vertex_distance(&ideal_sodalite().ring) < 1e-9);
        assert!(periodicity_residual(&r).abs() < 1e-12);
    }

    #[test]
    fn residual_is_nonzero_off_the_ideal_angle() {
        let mut p = D3RingParams::ideal();
        p.phi += 0.1;
        let r = periodicity_residual(&build_d3_ring(&p).unwrap());
        // the ideal angle is a double zero at rho = 1, so the residual is small but clear of noise
        assert!(r.abs() > 1e-6, "{r}");
    }

    #[test]
    fn residual_is_even_under_the_hexagon_plane_mirror() {
        // the mirror in the hexagon plane sends phi to π − phi and flips both branch signs
        let f = D3Frame::ideal();
        for rho in [0.6, 0.95, 1.0] {
            let fam = solve_generating_edge(&f, rho).unwrap();
            for &(lo, hi) in &fam.intervals {
                for i in 1..20 {
                    let phi = lo + (hi - lo) * i as f64 / 20.0;
                    for (root, mirror) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        let a = build_d3_ring(&D3RingParams { rho, phi, branch: D3Branch { root, mirror } }).unwrap();
                        let b = build_d3_ring(&D3RingParams {
                            rho,
                            phi: PI - phi,
                            branch: D3Branch { root: -root, mirror: -mirror },
                        })
                        .unwrap();
                        let (ra, rb) = (periodicity_residual(&a), periodicity_residual(&b));
                        assert!((ra - rb).abs() < 1e-10, "rho {rho} phi {phi}: {ra} vs {rb}");
                    }
                }
            }
        }
    }

    #[test]
    fn built_rings_are_regular_and_symmetric() {
        let f = D3Frame::ideal();
        for rho in [0.4, 0.9, 1.0] {
            let fam = solve_generating_edge(&f, rho).unwrap();
            let (lo, hi) = fam.intervals[0];
            for i in 1..10 {
                let phi = lo + (hi - lo) * i as f64 / 10.0;
                for mirror in [1, -1] {
                    let r = build_d3_ring(&D3RingParams { rho, phi, branch: D3Branch { root: 1, mirror } }).unwrap();
                    assert!(d3_residual(&r).value < 1e-9);
                    assert!(frame_reflection_mismatch(&f, &r) < 1e-9);
                    for t in &r.tetra {
                        assert!(t.edge_lengths().iter().all(|l| (l - EDGE).abs() < 1e-9));
                    }
                    assert!((hexagon_radius(&r) - rho).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn construction_is_equivariant() {
        let g = RigidMotion::new(
            crate::geom::Rotation::from_axis_angle(Vec3::new(0.3, -1.0, 0.2), 0.7),
            Vec3::new(1.0, 2.0, -3.0),
        );
        let p = D3RingParams { rho: 0.9, phi: 3.0, branch: D3Branch::IDEAL };
        let a = build_d3_ring(&p).unwrap().transformed(&g);
        let b = build_d3_ring_in(&D3Frame::ideal().transformed(&g), &p).unwrap();
        assert!(a.max_vertex_distance(&b) < 1e-12);
    }

    #[test]
    fn reconstruction_rejects_wrong_edges() {
        let b = Vec3::ZERO;
        let p = Vec3::new(circumradius(), 0.0, 0.0);
        let q = Vec3::new(0.0, circumradius(), 0.0);
        assert!(matches!(reconstruct_tetrahedron(b, p, q, 1), Err(Error::Reconstruction(_))));
    }

    #[test]
    fn tetrahedrite_detection() {
        assert!(!detect_tetrahedrite(&ideal_sodalite(), 1e-8));
        let sample = central_deform(&sample_params(7, 0));
        assert!(!detect_tetrahedrite(&sample, 1e-8));
    }

    #[test]
    fn tilt_curve_is_periodic_and_valid() {
        let t = trace_tilt_curve(0.01, 30, 1);
        assert_eq!(t.points.len(), 31, "{:?}", t.stop);
        assert!(t.points[0].placement.ring.max_vertex_distance(&ideal_sodalite().ring) < 1e-12);
        for p in &t.points {
            assert!(p.periodicity_residual.abs() < 1e-10);
            let report = validate_placement(&p.placement, 1e-8);
            assert!(report.check(CheckKind::GeneratorPairs).passed);
            assert!(report.passed());
        }
        assert!(t.points[1..].iter().all(|p| p.tetrahedrite));
    }

    #[test]
    fn tilt_tangent_is_an_infinitesimal_flex() {
        let ideal = ideal_sodalite();
        let sys = build_constraint_system(&ideal).unwrap();
        let v = tilt_tangent(1e-8).unwrap();
        assert!(jacobian_image_norm(&sys, &v) < 1e-6);
    }

    #[test]
    fn centro_family_recovers_the_ideal() {
        let c = build_centro_d3_ring(1.0).unwrap();
        assert!(c.placement.ring.max_vertex_distance(&ideal_sodalite().ring) < 1e-8);
    }

    #[test]
    fn centro_family_has_both_symmetries() {
        for rho in [0.3, 0.8, 0.97, 1.005] {
            let c = build_centro_d3_ring(rho).unwrap();
            let r = &c.placement.ring;
            assert!(central_symmetry_residual(r).value < 1e-9);
            assert!(d3_residual(r).value < 1e-9);
            assert!(distant_edge_bisector_defect(r) < 1e-8);
            assert!(periodicity_residual(r).abs() < 1e-9);
            assert!(validate_placement(&c.placement, 1e-9).passed());
        }
        assert!(build_centro_d3_ring(1.1).is_err());
    }
}
