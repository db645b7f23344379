//! The periodic constraint system (edge lengths and period identifications), its Jacobian,
//! trivial motions and numerical flex counts.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::consts::{EDGE, SOLVER_TOL};
use crate::error::{Error, Result};
use crate::framework::{validate_placement, PeriodicPlacement, SixRing, VertexLayout};
use crate::geom::{Tetrahedron, Vec3, TETRA_EDGES};

/// Default relative rank cutoff.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Vertex coordinates (distinct ring vertices in layout order) followed by the three generators.
pub fn placement_variables(p: &PeriodicPlacement) -> Vec<f64> {
    let layout = p.layout();
    let mut x: Vec<f64> = layout.positions(&p.ring).iter().flat_map(|v| v.to_array()).collect();
    x.extend(p.lattice.g.iter().flat_map(|v| v.to_array()));
    x
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodConstraint {
    pub source: usize,
    pub target: usize,
    pub coefficients: [i64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    pub layout: VertexLayout,
    /// Tetrahedron edges as distinct-vertex id pairs, six per tetrahedron in ring order.
    pub edges: Vec<(usize, usize)>,
    pub periods: Vec<PeriodConstraint>,
    /// Squared target length of every edge.
    pub edge_sq: f64,
    pub base: Vec<f64>,
}

fn vec_at(x: &[f64], i: usize) -> Vec3 {
    Vec3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])
}

impl ConstraintSystem {
    pub fn num_vertices(&self) -> usize {
        self.layout.len()
    }

    pub fn num_variables(&self) -> usize {
        3 * self.num_vertices() + 9
    }

    pub fn num_constraints(&self) -> usize {
        self.edges.len() + 3 * self.periods.len()
    }

    fn generator(&self, x: &[f64], k: usize) -> Vec3 {
        vec_at(x, self.num_vertices() + k)
    }

    /// Edge rows `|vᵢ − vⱼ|² − e²`, then three rows per period `v_t − v_s − Σ nₖ λₖ`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = Vec::with_capacity(self.num_constraints());
        for &(i, j) in &self.edges {
            r.push((vec_at(x, i) - vec_at(x, j)).norm_squared() - self.edge_sq);
        }
        for pc in &self.periods {
            let mut d = vec_at(x, pc.target) - vec_at(x, pc.source);
            for k in 0..3 {
                d -= self.generator(x, k) * pc.coefficients[k] as f64;
            }
            r.extend(d.to_array());
        }
        r
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.num_vertices();
        let mut j = DMatrix::zeros(self.num_constraints(), self.num_variables());
        for (row, &(a, b)) in self.edges.iter().enumerate() {
            let d = (vec_at(x, a) - vec_at(x, b)) * 2.0;
            for c in 0..3 {
                j[(row, 3 * a + c)] = d[c];
                j[(row, 3 * b + c)] = -d[c];
            }
        }
        let base = self.edges.len();
        for (m, pc) in self.periods.iter().enumerate() {
            for c in 0..3 {
                let row = base + 3 * m + c;
                j[(row, 3 * pc.target + c)] += 1.0;
                j[(row, 3 * pc.source + c)] -= 1.0;
                for k in 0..3 {
                    j[(row, 3 * (n + k) + c)] -= pc.coefficients[k] as f64;
                }
            }
        }
        j
    }

    /// Rows of the Jacobian involving vertex `i`.
    pub fn rows_involving_vertex(&self, i: usize) -> Vec<usize> {
        let mut rows: Vec<usize> =
            self.edges.iter().enumerate().filter(|(_, &(a, b))| a == i || b == i).map(|(r, _)| r).collect();
        for (m, pc) in self.periods.iter().enumerate() {
            if pc.source == i || pc.target == i {
                rows.extend((0..3).map(|c| self.edges.len() + 3 * m + c));
            }
        }
        rows
    }
}

pub fn build_constraint_system(p: &PeriodicPlacement) -> Result<ConstraintSystem> {
    let report = validate_placement(p, SOLVER_TOL);
    if !report.passed() {
        return Err(Error::InvalidPlacement(report.to_string()));
    }
    let layout = p.layout();
    let mut edges = Vec::with_capacity(36);
    for t in 0..6 {
        for &(i, j) in &TETRA_EDGES {
            edges.push((layout.slot_to_vertex[4 * t + i], layout.slot_to_vertex[4 * t + j]));
        }
    }
    let periods = p
        .marks
        .iter()
        .map(|m| PeriodConstraint {
            source: layout.id(m.source),
            target: layout.id(m.target),
            coefficients: m.coefficients(),
        })
        .collect();
    Ok(ConstraintSystem { layout, edges, periods, edge_sq: EDGE * EDGE, base: placement_variables(p) })
}

/// Three translations (lattice fixed) then three infinitesimal rotations about `e1, e2, e3`
/// (vertices about the origin, generators as vectors).
pub fn trivial_motion_basis(p: &PeriodicPlacement) -> [Vec<f64>; 6] {
    let x = placement_variables(p);
    let nv = p.layout().len();
    let axes = [Vec3::E1, Vec3::E2, Vec3::E3];
    std::array::from_fn(|k| {
        let mut v = vec![0.0; x.len()];
        for i in 0..nv + 3 {
            let w = if k < 3 {
                if i < nv {
                    axes[k]
                } else {
                    Vec3::ZERO
                }
            } else {
                axes[k - 3].cross(vec_at(&x, i))
            };
            v[3 * i..3 * i + 3].copy_from_slice(&w.to_array());
        }
        v
    })
}

/// Singular values (descending) and right singular vectors (columns, same order) of `m`,
/// zero-padded to a square matrix so the full right null space is available.
pub fn full_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.ncols();
    let mut a = DMatrix::zeros(n.max(m.nrows()), n);
    a.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(n, n, |r, c| vt[(order[c], r)]);
    (sv, v)
}

/// Numerical rank of a set of vectors after normalizing each, with relative cutoff `tol`.
pub fn numerical_rank(vectors: &[Vec<f64>], tol: f64) -> (usize, Vec<f64>) {
    if vectors.is_empty() {
        return (0, Vec::new());
    }
    let m = DMatrix::from_fn(vectors[0].len(), vectors.len(), |r, c| {
        let n = vectors[c].iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            vectors[c][r] / n
        } else {
            0.0
        }
    });
    let sv: Vec<f64> = {
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let rank = sv.iter().filter(|&&s| s > tol * sv[0]).count();
    (rank, sv)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlexReport {
    pub variables: usize,
    pub constraints: usize,
    /// Dimension of the numerical kernel, trivial motions included.
    pub kernel_dimension: usize,
    /// `kernel_dimension − 6`.
    pub nontrivial_dimension: usize,
    /// Jacobian singular values, descending (`min(rows, cols)` of them).
    pub singular_values: Vec<f64>,
    pub tol: f64,
    /// Smallest retained singular value divided by the largest discarded one.
    pub gap_ratio: f64,
    /// Orthonormal nontrivial flexes, orthogonal to the trivial motions.
    pub flex_basis: Vec<Vec<f64>>,
}

fn gap_ratio(sv: &[f64], rank: usize) -> f64 {
    match (rank.checked_sub(1).map(|i| sv[i]), sv.get(rank)) {
        (Some(kept), Some(&dropped)) if dropped > 0.0 => kept / dropped,
        (Some(_), _) => f64::INFINITY,
        _ => 0.0,
    }
}

/// Kernel of the Jacobian with relative cutoff `tol`, trivial motions projected out.
pub fn flex_dimension(p: &PeriodicPlacement, tol: f64) -> Result<FlexReport> {
    let cs = build_constraint_system(p)?;
    let jac = cs.jacobian(&cs.base);
    let (sv, v) = full_svd(&jac);
    let smax = sv[0];
    let rank = sv.iter().filter(|&&s| s > tol * smax).count();
    let kernel = cs.num_variables() - rank;
    if kernel < 6 {
        return Err(Error::TrivialMotionsUnresolved { kernel, tol });
    }
    // orthonormal basis of the trivial motions
    let trivial = trivial_motion_basis(p);
    let t = DMatrix::from_fn(cs.num_variables(), 6, |r, c| trivial[c][r]);
    let tq = t.qr().q();
    let kmat = v.columns(rank, kernel).into_owned();
    let projected = &kmat - &tq * (tq.transpose() * &kmat);
    let psvd = projected.svd(true, false);
    let u = psvd.u.expect("requested U");
    let mut idx: Vec<usize> = (0..psvd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| psvd.singular_values[j].total_cmp(&psvd.singular_values[i]));
    let nontrivial = kernel - 6;
    let flex_basis = idx.iter().take(nontrivial).map(|&i| u.column(i).iter().copied().collect()).collect();
    let singular_values = sv[..jac.nrows().min(jac.ncols())].to_vec();
    Ok(FlexReport {
        variables: cs.num_variables(),
        constraints: cs.num_constraints(),
        kernel_dimension: kernel,
        nontrivial_dimension: nontrivial,
        gap_ratio: gap_ratio(&sv, rank),
        singular_values,
        tol,
        flex_basis,
    })
}

/// `|J v|` at the base point of the system.
pub fn jacobian_image_norm(cs: &ConstraintSystem, v: &[f64]) -> f64 {
    (cs.jacobian(&cs.base) * DVector::from_column_slice(v)).norm()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkageReport {
    pub variables: usize,
    pub constraints: usize,
    /// Kernel dimension minus the 6 rigid motions.
    pub dof: i64,
    pub singular_values: Vec<f64>,
    pub gap_ratio: f64,
}

/// Edge-length-only linkage formed by tetrahedra whose vertices are merged within `dedup_tol`.
pub fn tetrahedra_linkage(tetra: &[Tetrahedron], dedup_tol: f64, tol: f64) -> LinkageReport {
    let mut verts: Vec<Vec3> = Vec::new();
    let mut edges = Vec::new();
    for t in tetra {
        let ids: Vec<usize> =
            t.v.iter()
                .map(|p| match verts.iter().position(|q| q.distance(*p) <= dedup_tol) {
                    Some(i) => i,
                    None => {
                        verts.push(*p);
                        verts.len() - 1
                    }
                })
                .collect();
        edges.extend(TETRA_EDGES.iter().map(|&(i, j)| (ids[i], ids[j])));
    }
    edge_linkage(&verts, &edges, tol)
}

/// Squared-length rigidity matrix of a bar framework and its kernel dimension minus 6.
pub fn edge_linkage(verts: &[Vec3], edges: &[(usize, usize)], tol: f64) -> LinkageReport {
    let n = 3 * verts.len();
    let mut j = DMatrix::zeros(edges.len(), n);
    for (row, &(a, b)) in edges.iter().enumerate() {
        let d = (verts[a] - verts[b]) * 2.0;
        for c in 0..3 {
            j[(row, 3 * a + c)] = d[c];
            j[(row, 3 * b + c)] = -d[c];
        }
    }
    let (sv, _) = full_svd(&j);
    let rank = sv.iter().filter(|&&s| s > tol * sv[0]).count();
    LinkageReport {
        variables: n,
        constraints: edges.len(),
        dof: (n - rank) as i64 - 6,
        gap_ratio: gap_ratio(&sv, rank),
        singular_values: sv[..edges.len().min(n)].to_vec(),
    }
}

/// Degrees of freedom of the ring as a finite linkage (no periodicity).
pub fn finite_linkage_dof(r: &SixRing) -> LinkageReport {
    let layout = VertexLayout::new(&r.contacts);
    let verts = layout.positions(r);
    let mut edges = Vec::with_capacity(36);
    for t in 0..6 {
        for &(i, j) in &TETRA_EDGES {
            edges.push((layout.slot_to_vertex[4 * t + i], layout.slot_to_vertex[4 * t + j]));
        }
    }
    edge_linkage(&verts, &edges, DEFAULT_RANK_TOL)
}
