use std::fmt;

use serde::Serialize;

use super::ring::PeriodicPlacement;
use crate::consts::EDGE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    RegularTetrahedra,
    ContactsCoincide,
    PeriodMarks,
    GeneratorPairs,
    LatticeNonDegenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub kind: CheckKind,
    pub passed: bool,
    /// Largest defect seen by this check (model units; relative determinant for the lattice check).
    pub worst: f64,
    /// The offending items, e.g. `T1-` or `T2-[1]>T1-[3]`.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tol: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, kind: CheckKind) -> &Check {
        self.checks.iter().find(|c| c.kind == kind).unwrap()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok  " } else { "FAIL" };
            write!(f, "{status} {:?} worst={:.3e}", c.kind, c.worst)?;
            if !c.failures.is_empty() {
                write!(f, " [{}]", c.failures.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn check(kind: CheckKind, tol: f64, items: impl IntoIterator<Item = (String, f64)>) -> Check {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, err) in items {
        // NaN counts as failure
        worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
        if !(err <= tol) {
            failures.push(name);
        }
    }
    Check { kind, passed: failures.is_empty(), worst, failures }
}

/// Checks the defining conditions of a sodalite placement. Failures are report entries.
pub fn validate_placement(p: &PeriodicPlacement, tol: f64) -> ValidationReport {
    let ring = &p.ring;
    let regular = ring.tetra.iter().enumerate().map(|(k, t)| {
        let err = t.edge_lengths().iter().map(|l| (l - EDGE).abs()).fold(0.0, f64::max);
        (super::RingLabel::at(k).to_string(), err)
    });
    let contacts =
        ring.contacts.iter().map(|c| (c.name.to_string(), ring.vertex(c.first).distance(ring.vertex(c.second))));
    let marks = p.marks.iter().map(|m| {
        let want = p.lattice.g[m.generator] * m.sign as f64;
        let err = (ring.vertex(m.target) - ring.vertex(m.source) - want).norm();
        (format!("{}>{}", m.source, m.target), err)
    });
    let realized = p.realized_periods();
    let pairs = (0..3).map(|k| {
        let users: Vec<usize> = (0..6).filter(|&i| p.marks[i].generator == k).collect();
        let err = match users[..] {
            [i, j] => (realized[i] - realized[j]).norm(),
            _ => f64::INFINITY,
        };
        (format!("lambda{}", k + 1), err)
    });
    let rel_det = p.lattice.det().abs() / p.lattice.norm_product();
    let mut lattice = check(CheckKind::LatticeNonDegenerate, f64::INFINITY, [("lattice".to_string(), rel_det)]);
    lattice.passed = !p.degenerate && !p.lattice.is_degenerate();
    if !lattice.passed {
        lattice.failures.push("lattice".into());
    }
    ValidationReport {
        tol,
        checks: vec![
            check(CheckKind::RegularTetrahedra, tol, regular),
            check(CheckKind::ContactsCoincide, tol, contacts),
            check(CheckKind::PeriodMarks, tol, marks),
            check(CheckKind::GeneratorPairs, tol, pairs),
            lattice,
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{ideal_sodalite, SixRing};
    use crate::geom::Vec3;

    #[test]
    fn ideal_passes() {
        let r = validate_placement(&ideal_sodalite(), 1e-9);
        assert!(r.passed(), "{r}");
        assert!(r.check(CheckKind::RegularTetrahedra).worst < 1e-14);
    }

    #[test]
    fn perturbed_marked_vertex_fails_the_right_checks() {
        let mut p = ideal_sodalite();
        // T1-[1] is the source of the first mark and not a contact
        p.ring.tetra[0].v[1] += Vec3::new(1e-3, 0.0, 0.0);
        let r = validate_placement(&p, 1e-9);
        assert!(!r.passed());
        assert_eq!(r.check(CheckKind::RegularTetrahedra).failures, ["T1-"]);
        assert!(r.check(CheckKind::ContactsCoincide).passed);
        assert_eq!(r.check(CheckKind::PeriodMarks).failures, ["T1-[1]>T3-[3]"]);
        assert_eq!(r.check(CheckKind::GeneratorPairs).failures, ["lambda2"]);
    }

    #[test]
    fn perturbed_contact_copy_breaks_the_contact() {
        let p = ideal_sodalite();
        let mut tetra = p.ring.tetra;
        tetra[1].v[0] += Vec3::new(0.0, 1e-3, 0.0);
        let mut q = p.clone();
        q.ring = SixRing::new_unsnapped(tetra, p.ring.contacts);
        let r = validate_placement(&q, 1e-9);
        assert_eq!(r.check(CheckKind::RegularTetrahedra).failures, ["T3+"]);
        assert_eq!(r.check(CheckKind::ContactsCoincide).failures, ["P13"]);
    }

    #[test]
    fn degenerate_flag_fails_lattice_check() {
        let mut p = ideal_sodalite();
        p.degenerate = true;
        let r = validate_placement(&p, 1e-9);
        assert!(!r.check(CheckKind::LatticeNonDegenerate).passed);
    }
}
