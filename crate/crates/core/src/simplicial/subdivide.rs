//! Edgewise subdivision.
//!
//! A k-simplex with vertices ordered by id is identified with the region
//! `m >= x_1 >= ... >= x_k >= 0` through the cumulative coordinates
//! `x_j = m * (λ_j + ... + λ_k)`. The Kuhn triangulation of the unit-cube grid
//! restricted to that region gives m^k congruent children. Because the
//! restriction to a face is the same construction on the face (with the
//! inherited vertex order), neighbouring simplices subdivide compatibly.

use std::collections::HashMap;

use smallvec::SmallVec;

use super::complex::{SimplexId, SimplicialComplex};
use super::simplex::{Simplex, VertexId};
use super::{GeometryError, Point};

/// Barycentric lattice coordinates of a subdivision vertex: pairs of parent
/// vertex id and positive integer weight, ascending by id, weights summing to
/// the subdivision order.
pub type LatticeKey = SmallVec<[(VertexId, u32); 4]>;

/// A refined complex together with the bookkeeping linking it to its parent.
#[derive(Clone, Debug)]
pub struct Subdivision {
    pub complex: SimplicialComplex,
    pub levels: u32,
    /// Subdivision order m = 2^levels.
    pub order: u32,
    /// Lattice coordinates of every refined vertex over the parent's vertices.
    pub lattice: Vec<LatticeKey>,
    lookup: HashMap<LatticeKey, VertexId>,
    parent_vertex_count: usize,
}

/// Subdivides every simplex of `k` edgewise with order `2^levels`.
///
/// The refined complex starts with the parent's vertices (same ids); with
/// `levels == 0` it is a copy of the parent.
pub fn subdivide_uniform(k: &SimplicialComplex, levels: u32) -> Result<Subdivision, GeometryError> {
    let order = 1u32
        .checked_shl(levels)
        .filter(|&m| m <= 1 << 16)
        .ok_or(GeometryError::Degenerate)?;
    let nv = k.vertices().len();
    let mut lattice: Vec<LatticeKey> = (0..nv as VertexId)
        .map(|v| SmallVec::from_slice(&[(v, order)]))
        .collect();
    if levels == 0 {
        return Ok(Subdivision {
            complex: k.clone(),
            levels,
            order,
            lattice,
            lookup: HashMap::new(),
            parent_vertex_count: nv,
        });
    }
    let mut vertices = k.vertices().to_vec();
    let mut lookup: HashMap<LatticeKey, VertexId> = HashMap::new();
    let mut children = Vec::new();
    let templates: Vec<Vec<Vec<[u32; 4]>>> =
        (0..=k.dim()).map(|d| child_template(d, order)).collect();
    for id in k.skeleton(k.dim()).maximal(k) {
        let mut parent: SmallVec<[VertexId; 4]> = SmallVec::from_slice(k.simplex_of(id));
        parent.sort_unstable();
        let d = parent.len() - 1;
        for child in &templates[d] {
            let mut ids: SmallVec<[VertexId; 4]> = SmallVec::new();
            for weights in child {
                let key: LatticeKey = parent
                    .iter()
                    .zip(&weights[..=d])
                    .filter(|(_, &w)| w > 0)
                    .map(|(&v, &w)| (v, w))
                    .collect();
                let vid = if key.len() == 1 {
                    key[0].0
                } else {
                    *lookup.entry(key).or_insert_with_key(|key| {
                        let mut p = Point::zero(k.ambient_dim());
                        for &(v, w) in key {
                            p += k.vertex(v) * (w as f64 / order as f64);
                        }
                        vertices.push(p);
                        lattice.push(key.clone());
                        (vertices.len() - 1) as VertexId
                    })
                };
                ids.push(vid);
            }
            children.push(Simplex::new(&ids));
        }
    }
    let complex = SimplicialComplex::from_maximal(k.ambient_dim(), vertices, children)?;
    Ok(Subdivision {
        complex,
        levels,
        order,
        lattice,
        lookup,
        parent_vertex_count: nv,
    })
}

/// Children of the order-`m` subdivision of a d-simplex, as barycentric
/// lattice weights over the (sorted) parent vertices.
fn child_template(d: usize, m: u32) -> Vec<Vec<[u32; 4]>> {
    if d == 0 {
        let mut w = [0; 4];
        w[0] = m;
        return vec![vec![w]];
    }
    let perms = permutations(d);
    let mut out = Vec::new();
    let mut base = vec![0u32; d];
    loop {
        for perm in &perms {
            let mut c = base.clone();
            let mut corners = vec![c.clone()];
            for &axis in perm {
                c[axis] += 1;
                corners.push(c.clone());
            }
            if corners.iter().all(|c| is_in_region(c, m)) {
                out.push(
                    corners
                        .iter()
                        .map(|c| cumulative_to_weights(c, m))
                        .collect(),
                );
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            base[i] += 1;
            if base[i] < m {
                break;
            }
            base[i] = 0;
            i += 1;
        }
    }
}

fn is_in_region(c: &[u32], m: u32) -> bool {
    c[0] <= m && c.windows(2).all(|w| w[0] >= w[1])
}

fn cumulative_to_weights(c: &[u32], m: u32) -> [u32; 4] {
    let d = c.len();
    let mut w = [0u32; 4];
    w[0] = m - c[0];
    for j in 1..d {
        w[j] = c[j - 1] - c[j];
    }
    w[d] = c[d - 1];
    w
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(d - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, d - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

impl Subdivision {
    pub fn parent_vertex_count(&self) -> usize {
        self.parent_vertex_count
    }

    /// Refined vertex with the given lattice coordinates, if present.
    pub fn vertex_at(&self, key: &[(VertexId, u32)]) -> Option<VertexId> {
        if key.len() == 1 {
            let v = key[0].0;
            return ((v as usize) < self.parent_vertex_count && key[0].1 == self.order)
                .then_some(v);
        }
        self.lookup.get(key).copied()
    }

    /// The smallest parent simplex containing the given refined simplex.
    pub fn carrier(&self, parent: &SimplicialComplex, child: &[VertexId]) -> Option<SimplexId> {
        let mut support: SmallVec<[VertexId; 4]> = SmallVec::new();
        for &v in child {
            for &(p, _) in &self.lattice[v as usize] {
                if !support.contains(&p) {
                    if support.len() == 4 {
                        return None;
                    }
                    support.push(p);
                }
            }
        }
        parent.find(&support)
    }

    /// Finds the refined simplex containing the point with barycentric
    /// coordinates `bary` in the parent simplex `parent_sorted` (vertex ids
    /// ascending). Returns the child's vertex ids and its barycentric weights.
    pub fn locate_child(
        &self,
        parent_sorted: &[VertexId],
        bary: &[f64],
    ) -> Option<(SmallVec<[VertexId; 4]>, SmallVec<[f64; 4]>)> {
        let d = parent_sorted.len() - 1;
        let m = self.order as f64;
        if self.order == 1 {
            return Some((
                SmallVec::from_slice(parent_sorted),
                SmallVec::from_slice(bary),
            ));
        }
        let mut lam: SmallVec<[f64; 4]> = bary.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = lam.iter().sum();
        for l in lam.iter_mut() {
            *l /= total;
        }
        // Cumulative coordinates, their cube base and fractional parts.
        let mut x = [0.0; 3];
        let mut acc = 0.0;
        for j in (1..=d).rev() {
            acc += lam[j];
            x[j - 1] = (acc * m).min(m);
        }
        let mut base = [0u32; 3];
        let mut frac = [0.0; 3];
        for j in 0..d {
            let b = (x[j].floor() as i64).clamp(0, self.order as i64 - 1) as u32;
            base[j] = b;
            frac[j] = (x[j] - b as f64).clamp(0.0, 1.0);
        }
        let mut perm: SmallVec<[usize; 3]> = (0..d).collect();
        perm.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]));
        let mut ids = SmallVec::new();
        let mut weights = SmallVec::new();
        let mut c = base;
        let mut prev = 1.0;
        for step in 0..=d {
            if step > 0 {
                c[perm[step - 1]] += 1;
            }
            let next = if step < d { frac[perm[step]] } else { 0.0 };
            weights.push(prev - next);
            prev = next;
            let w = cumulative_to_weights(&c[..d], self.order);
            let key: LatticeKey = parent_sorted
                .iter()
                .zip(&w[..=d])
                .filter(|(_, &w)| w > 0)
                .map(|(&v, &w)| (v, w))
                .collect();
            ids.push(self.vertex_at(&key)?);
        }
        Some((ids, weights))
    }
}
