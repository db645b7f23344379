use std::collections::VecDeque;

use serde::Serialize;

use super::ring::{PeriodicPlacement, VertexRef};
use super::validate::validate_placement;
use crate::consts::SOLVER_TOL;
use crate::error::{Error, Result};
use crate::geom::TETRA_EDGES;

/// Edge orbit joining vertex orbits `a` and `b`; the lift of `b` sits at `period` (generator basis)
/// relative to the lift of `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientEdge {
    pub a: usize,
    pub b: usize,
    pub period: [i64; 3],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientGraph {
    pub vertex_orbits: usize,
    pub edges: Vec<QuotientEdge>,
    /// Orbit id of each of the 24 tetrahedron slots.
    pub orbit_of_slot: Vec<usize>,
}

impl QuotientGraph {
    pub fn edge_orbits(&self) -> usize {
        self.edges.len()
    }

    /// Number of edge ends at each orbit (loops count twice).
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertex_orbits];
        for e in &self.edges {
            d[e.a] += 1;
            d[e.b] += 1;
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_orbits == 0 {
            return true;
        }
        let mut seen = vec![false; self.vertex_orbits];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for e in &self.edges {
                let other = if e.a == u {
                    e.b
                } else if e.b == u {
                    e.a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    queue.push_back(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Vertex and edge orbits under the period lattice, read off the contact and mark identifications.
pub fn quotient_graph(p: &PeriodicPlacement) -> Result<QuotientGraph> {
    let report = validate_placement(p, SOLVER_TOL);
    if !report.passed() {
        return Err(Error::InvalidPlacement(report.to_string()));
    }
    // identification graph on slots: (neighbour, lattice offset of neighbour relative to self)
    let mut adj: Vec<Vec<(usize, [i64; 3])>> = vec![Vec::new(); 24];
    for c in &p.ring.contacts {
        let (a, b) = (c.first.slot(), c.second.slot());
        adj[a].push((b, [0; 3]));
        adj[b].push((a, [0; 3]));
    }
    for m in &p.marks {
        let (s, t) = (m.source.slot(), m.target.slot());
        let c = m.coefficients();
        // position(t) = position(s) + λ, so the orbit representative of t is shifted by −λ
        adj[s].push((t, c.map(|x| -x)));
        adj[t].push((s, c));
    }
    let mut orbit = [usize::MAX; 24];
    let mut offset = [[0i64; 3]; 24];
    let mut n = 0;
    for start in 0..24 {
        if orbit[start] != usize::MAX {
            continue;
        }
        orbit[start] = n;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(v, d) in &adj[u] {
                let o = [0, 1, 2].map(|i| offset[u][i] + d[i]);
                if orbit[v] == usize::MAX {
                    orbit[v] = n;
                    offset[v] = o;
                    queue.push_back(v);
                } else if offset[v] != o {
                    return Err(Error::InvalidPlacement(format!(
                        "inconsistent period identifications at {}",
                        VertexRef::from_slot(v)
                    )));
                }
            }
        }
        n += 1;
    }
    // slot s sits at (its orbit representative) − offset[s]·Λ
    let mut edges = Vec::with_capacity(36);
    for t in 0..6 {
        for &(i, j) in &TETRA_EDGES {
            let (s, u) = (4 * t + i, 4 * t + j);
            edges.push(QuotientEdge {
                a: orbit[s],
                b: orbit[u],
                period: [0, 1, 2].map(|k| offset[s][k] - offset[u][k]),
            });
        }
    }
    Ok(QuotientGraph { vertex_orbits: n, edges, orbit_of_slot: orbit.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::ideal_sodalite;
    use crate::geom::Vec3;

    #[test]
    fn ideal_counts() {
        let g = quotient_graph(&ideal_sodalite()).unwrap();
        assert_eq!(g.vertex_orbits, 12);
        assert_eq!(g.edge_orbits(), 36);
        assert!(g.degrees().iter().all(|&d| d == 6));
        assert!(g.is_connected());
    }

    #[test]
    fn periods_reproduce_edge_vectors() {
        // lifting every edge through the orbit representatives gives the actual edge vector
        let p = ideal_sodalite();
        let g = quotient_graph(&p).unwrap();
        let rep: Vec<Vec3> = (0..g.vertex_orbits)
            .map(|o| {
                let s = g.orbit_of_slot.iter().position(|&x| x == o).unwrap();
                p.ring.vertex(VertexRef::from_slot(s))
            })
            .collect();
        let mut k = 0;
        for t in 0..6 {
            for &(i, j) in &TETRA_EDGES {
                let e = g.edges[k];
                k += 1;
                let actual = p.ring.tetra[t].v[j] - p.ring.tetra[t].v[i];
                let lifted = rep[e.b] + p.lattice.point(e.period) - rep[e.a];
                assert!((actual - lifted).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_placement_is_rejected() {
        let mut p = ideal_sodalite();
        p.ring.tetra[2].v[3] += Vec3::E1 * 0.01;
        assert!(quotient_graph(&p).is_err());
    }
}
