use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::lp::{self, LpOutcome};
use super::simplex::{faces_of, geometric_independence, orientation, Simplex, VertexId};
use super::{GeometryError, Point};

/// Identifies a simplex of a complex by dimension and position in that
/// dimension's list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SimplexId {
    pub dim: u8,
    pub index: u32,
}

impl SimplexId {
    pub fn new(dim: usize, index: usize) -> Self {
        Self {
            dim: dim as u8,
            index: index as u32,
        }
    }
}

/// Packs up to four ascending vertex ids into one sortable key.
pub(crate) fn simplex_key(sorted_ids: &[VertexId]) -> u128 {
    let mut key = 0u128;
    for (i, &v) in sorted_ids.iter().enumerate() {
        key |= (v as u128) << (32 * (3 - i));
    }
    key
}

fn sorted_key(ids: &[VertexId]) -> u128 {
    let mut buf = [0; 4];
    buf[..ids.len()].copy_from_slice(ids);
    buf[..ids.len()].sort_unstable();
    simplex_key(&buf[..ids.len()])
}

/// A finite simplicial complex embedded in R^n.
///
/// Simplices are stored per dimension in flat arrays (stride k+1). The list
/// of the highest dimension keeps the caller's order and vertex order (so
/// orientation is preserved); every lower-dimensional list holds simplices
/// with ascending vertex ids, sorted, which makes face lookup a binary search.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    n: usize,
    vertices: Vec<Point>,
    simplices: Vec<Vec<VertexId>>,
    /// Positions of top simplices sorted by canonical key.
    top_order: Vec<u32>,
}

impl SimplicialComplex {
    /// Builds the face closure of the given simplices. Simplices of the
    /// highest dimension present are kept in the given order.
    pub fn from_maximal<I>(
        n: usize,
        vertices: Vec<Point>,
        simplices: I,
    ) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = Simplex>,
    {
        let given: Vec<Simplex> = simplices.into_iter().collect();
        let top = given.iter().map(|s| s.dim()).max().unwrap_or(0);
        let mut per_dim: Vec<Vec<u128>> = vec![Vec::new(); top + 1];
        let mut top_flat = Vec::new();
        for s in &given {
            check_ids(s, vertices.len())?;
            if s.dim() == top {
                top_flat.extend_from_slice(s.vertices());
            }
            let k1 = s.vertices().len() as u32;
            for mask in 1..(1u32 << k1) {
                let f = s.face(mask);
                if f.dim() < top {
                    per_dim[f.dim()].push(sorted_key(f.vertices()));
                }
            }
        }
        let mut lists = Vec::with_capacity(top + 1);
        for (k, mut keys) in per_dim.into_iter().enumerate() {
            if k == top {
                break;
            }
            keys.sort_unstable();
            keys.dedup();
            lists.push(unpack_keys(&keys, k));
        }
        // Vertices not used by any simplex still become 0-simplices.
        if top > 0 && lists[0].len() != vertices.len() {
            lists[0] = (0..vertices.len() as VertexId).collect();
        }
        lists.push(top_flat);
        Ok(Self::assemble(n, vertices, lists))
    }

    /// Uses the given per-dimension lists verbatim (no closure is computed).
    /// Intended for validating externally supplied complexes.
    pub fn from_parts(
        n: usize,
        vertices: Vec<Point>,
        lists: Vec<Vec<Simplex>>,
    ) -> Result<Self, GeometryError> {
        let top = lists.len().saturating_sub(1);
        let mut flat = Vec::with_capacity(lists.len());
        for (k, list) in lists.into_iter().enumerate() {
            for s in &list {
                check_ids(s, vertices.len())?;
                if s.dim() != k {
                    return Err(GeometryError::DimensionMismatch {
                        expected: k,
                        found: s.dim(),
                    });
                }
            }
            if k == top {
                flat.push(
                    list.iter()
                        .flat_map(|s| s.vertices().iter().copied())
                        .collect(),
                );
            } else {
                let mut keys: Vec<u128> = list.iter().map(|s| sorted_key(s.vertices())).collect();
                keys.sort_unstable();
                flat.push(unpack_keys(&keys, k));
            }
        }
        Ok(Self::assemble(n, vertices, flat))
    }

    fn assemble(n: usize, vertices: Vec<Point>, simplices: Vec<Vec<VertexId>>) -> Self {
        let top = simplices.len().saturating_sub(1);
        let stride = top + 1;
        let count = simplices.last().map_or(0, |l| l.len() / stride);
        let mut top_order: Vec<u32> = (0..count as u32).collect();
        if let Some(list) = simplices.last() {
            top_order.sort_by_cached_key(|&i| {
                sorted_key(&list[i as usize * stride..(i as usize + 1) * stride])
            });
        }
        Self {
            n,
            vertices,
            simplices,
            top_order,
        }
    }

    /// Ambient dimension.
    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Largest simplex dimension present.
    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> Point {
        self.vertices[v as usize]
    }

    pub(crate) fn set_vertex(&mut self, v: VertexId, p: Point) {
        self.vertices[v as usize] = p;
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, |l| l.len() / (k + 1))
    }

    pub fn total_count(&self) -> usize {
        (0..=self.dim()).map(|k| self.count(k)).sum()
    }

    /// Vertex ids of simplex `index` of dimension `k`.
    #[inline]
    pub fn simplex(&self, k: usize, index: usize) -> &[VertexId] {
        &self.simplices[k][index * (k + 1)..(index + 1) * (k + 1)]
    }

    pub fn simplex_of(&self, id: SimplexId) -> &[VertexId] {
        self.simplex(id.dim as usize, id.index as usize)
    }

    pub fn iter_dim(&self, k: usize) -> impl Iterator<Item = &[VertexId]> + '_ {
        let stride = k + 1;
        self.simplices
            .get(k)
            .map(|l| l.chunks_exact(stride))
            .into_iter()
            .flatten()
    }

    pub fn positions(&self, ids: &[VertexId]) -> smallvec::SmallVec<[Point; 4]> {
        ids.iter().map(|&v| self.vertices[v as usize]).collect()
    }

    /// Looks up a simplex by its vertex set (any order).
    pub fn find(&self, ids: &[VertexId]) -> Option<SimplexId> {
        let k = ids.len().checked_sub(1)?;
        if k > self.dim() {
            return None;
        }
        let key = sorted_key(ids);
        if k == self.dim() {
            let list = &self.simplices[k];
            let stride = k + 1;
            let pos = self
                .top_order
                .binary_search_by_key(&key, |&i| {
                    sorted_key(&list[i as usize * stride..(i as usize + 1) * stride])
                })
                .ok()?;
            return Some(SimplexId::new(k, self.top_order[pos] as usize));
        }
        let list = &self.simplices[k];
        let stride = k + 1;
        let count = list.len() / stride;
        let (mut lo, mut hi) = (0usize, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let mk = simplex_key(&list[mid * stride..(mid + 1) * stride]);
            match mk.cmp(&key) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(SimplexId::new(k, mid)),
            }
        }
        None
    }

    /// Simplices of dimension at most `d`.
    pub fn skeleton(&self, d: usize) -> SubComplex {
        let selected = (0..=d.min(self.dim()))
            .map(|k| (0..self.count(k) as u32).collect())
            .collect();
        SubComplex { selected }
    }

    /// Every simplex having `v` as a vertex (the vertex itself included).
    pub fn vertex_star(&self, v: VertexId) -> Result<Vec<SimplexId>, GeometryError> {
        if v as usize >= self.vertices.len() {
            return Err(GeometryError::UnknownVertex(v));
        }
        let mut out = Vec::new();
        for k in 0..=self.dim() {
            for (i, s) in self.iter_dim(k).enumerate() {
                if s.contains(&v) {
                    out.push(SimplexId::new(k, i));
                }
            }
        }
        Ok(out)
    }

    /// Compressed vertex -> incident k-simplex table.
    pub fn incidence(&self, k: usize) -> Incidence {
        let nv = self.vertices.len();
        let mut offsets = vec![0u32; nv + 1];
        for s in self.iter_dim(k) {
            for &v in s {
                offsets[v as usize + 1] += 1;
            }
        }
        for i in 0..nv {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut items = vec![0u32; offsets[nv] as usize];
        for (i, s) in self.iter_dim(k).enumerate() {
            for &v in s {
                items[fill[v as usize] as usize] = i as u32;
                fill[v as usize] += 1;
            }
        }
        Incidence { offsets, items }
    }

    /// Total k-volume of the top simplices.
    pub fn top_volume(&self) -> f64 {
        let k = self.dim();
        self.iter_dim(k)
            .map(|s| super::simplex::volume(&self.positions(s)))
            .sum()
    }

    /// Checks face closure, geometric independence of every simplex, and
    /// that every two maximal simplices meet in a common face (or not at all).
    pub fn validate(&self) -> ValidationReport {
        validate_complex(self)
    }
}

fn check_ids(s: &Simplex, nv: usize) -> Result<(), GeometryError> {
    if let Some(&v) = s.vertices().iter().find(|&&v| v as usize >= nv) {
        return Err(GeometryError::UnknownVertex(v));
    }
    Ok(())
}

fn unpack_keys(keys: &[u128], k: usize) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(keys.len() * (k + 1));
    for &key in keys {
        for i in 0..=k {
            out.push((key >> (32 * (3 - i))) as u32);
        }
    }
    out
}

/// CSR table of incident simplices per vertex.
#[derive(Clone, Debug)]
pub struct Incidence {
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl Incidence {
    pub fn of(&self, v: VertexId) -> &[u32] {
        &self.items[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }
}

/// A selection of simplices of a parent complex (ids per dimension).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubComplex {
    pub selected: Vec<Vec<u32>>,
}

impl SubComplex {
    pub fn count(&self, k: usize) -> usize {
        self.selected.get(k).map_or(0, |l| l.len())
    }

    pub fn total_count(&self) -> usize {
        self.selected.iter().map(|l| l.len()).sum()
    }

    pub fn contains(&self, id: SimplexId) -> bool {
        self.selected
            .get(id.dim as usize)
            .is_some_and(|l| l.binary_search(&id.index).is_ok())
    }

    /// True when every face of every selected simplex is selected.
    pub fn is_face_closed(&self, parent: &SimplicialComplex) -> bool {
        for (k, list) in self.selected.iter().enumerate().skip(1) {
            for &i in list {
                let s = Simplex::new(parent.simplex(k, i as usize));
                for f in faces_of(&s).into_iter().filter(|f| f.proper) {
                    match parent.find(f.simplex.vertices()) {
                        Some(id) if self.contains(id) => {}
                        _ => return false,
                    }
                }
            }
        }
        true
    }

    /// Simplices of the selection not contained in a larger selected simplex.
    pub fn maximal(&self, parent: &SimplicialComplex) -> Vec<SimplexId> {
        let mut covered: Vec<std::collections::HashSet<u32>> =
            vec![Default::default(); self.selected.len()];
        for (k, list) in self.selected.iter().enumerate().skip(1) {
            for &i in list {
                let s = parent.simplex(k, i as usize);
                for skip in 0..=k {
                    let face: smallvec::SmallVec<[VertexId; 4]> = s
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    if let Some(id) = parent.find(&face) {
                        covered[k - 1].insert(id.index);
                    }
                }
            }
        }
        let mut out = Vec::new();
        for (k, list) in self.selected.iter().enumerate() {
            for &i in list {
                if !covered[k].contains(&i) {
                    out.push(SimplexId::new(k, i as usize));
                }
            }
        }
        out
    }
}

/// A finding of `validate_complex`.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// A simplex repeats a vertex or its vertices are affinely dependent.
    Degenerate {
        simplex: Vec<VertexId>,
    },
    /// Condition (1): a face of a listed simplex is not listed.
    MissingFace {
        simplex: Vec<VertexId>,
        face: Vec<VertexId>,
    },
    /// Condition (2): two simplices meet in something other than a common face.
    ImproperIntersection {
        a: Vec<VertexId>,
        b: Vec<VertexId>,
    },
    DuplicateSimplex {
        simplex: Vec<VertexId>,
    },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub pairs_checked: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_complex(c: &SimplicialComplex) -> ValidationReport {
    let mut report = ValidationReport::default();
    let top = c.dim();

    // Duplicates and degeneracy.
    for k in 0..=top {
        let mut keys: Vec<u128> = c.iter_dim(k).map(sorted_key).collect();
        keys.sort_unstable();
        for w in keys.windows(2) {
            if w[0] == w[1] {
                report.violations.push(Violation::DuplicateSimplex {
                    simplex: unpack_keys(&w[..1], k),
                });
            }
        }
        for s in c.iter_dim(k) {
            let mut ids = s.to_vec();
            ids.sort_unstable();
            ids.dedup();
            let independent =
                ids.len() == s.len() && geometric_independence(&c.positions(s)).unwrap_or(false);
            if !independent || k > c.ambient_dim() {
                report.violations.push(Violation::Degenerate {
                    simplex: s.to_vec(),
                });
            }
        }
    }

    // Condition (1): every facet of a listed simplex is listed; by induction
    // this covers all faces.
    let mut is_face = vec![Vec::<bool>::new(); top + 1];
    for (k, flags) in is_face.iter_mut().enumerate() {
        *flags = vec![false; c.count(k)];
    }
    for k in 1..=top {
        for s in c.iter_dim(k) {
            for skip in 0..=k {
                let face: Vec<VertexId> = s
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &v)| v)
                    .collect();
                match c.find(&face) {
                    Some(id) => is_face[k - 1][id.index as usize] = true,
                    None => report.violations.push(Violation::MissingFace {
                        simplex: s.to_vec(),
                        face,
                    }),
                }
            }
        }
    }

    // Condition (2) on maximal simplices; faces inherit proper intersection.
    let maximal: Vec<(usize, usize)> = (0..=top)
        .flat_map(|k| (0..c.count(k)).map(move |i| (k, i)))
        .filter(|&(k, i)| !is_face[k][i])
        .collect();
    let boxes: Vec<(Point, Point)> = maximal
        .iter()
        .map(|&(k, i)| bbox(&c.positions(c.simplex(k, i))))
        .collect();
    for (a, b) in candidate_pairs(&boxes, c.ambient_dim()) {
        report.pairs_checked += 1;
        let (ka, ia) = maximal[a];
        let (kb, ib) = maximal[b];
        let sa = c.simplex(ka, ia);
        let sb = c.simplex(kb, ib);
        if !intersect_properly(c, sa, sb) {
            report.violations.push(Violation::ImproperIntersection {
                a: sa.to_vec(),
                b: sb.to_vec(),
            });
        }
    }
    report
}

fn bbox(points: &[Point]) -> (Point, Point) {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in &points[1..] {
        for d in 0..p.dim() {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

/// Pairs of boxes that overlap (touching counts), found with a uniform grid.
fn candidate_pairs(boxes: &[(Point, Point)], n: usize) -> Vec<(usize, usize)> {
    if boxes.len() < 2 {
        return Vec::new();
    }
    let mut extent = 0.0;
    let mut lo = boxes[0].0;
    for (l, h) in boxes {
        extent += (*h - *l).norm_inf();
        for d in 0..n {
            lo[d] = lo[d].min(l[d]);
        }
    }
    let cell = (extent / boxes.len() as f64).max(1e-9);
    let tol = 1e-9 * cell;
    let cell_range = |l: &Point, h: &Point| -> ([i64; 3], [i64; 3]) {
        let mut a = [0i64; 3];
        let mut b = [0i64; 3];
        for d in 0..n {
            a[d] = ((l[d] - tol - lo[d]) / cell).floor() as i64;
            b[d] = ((h[d] + tol - lo[d]) / cell).floor() as i64;
        }
        (a, b)
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, (l, h)) in boxes.iter().enumerate() {
        let (a, b) = cell_range(l, h);
        for_each_cell(a, b, n, |c| grid.entry(c).or_default().push(i));
    }
    let overlaps = |i: usize, j: usize| {
        (0..n).all(|d| boxes[i].0[d] <= boxes[j].1[d] + tol && boxes[j].0[d] <= boxes[i].1[d] + tol)
    };
    let mut pairs = Vec::new();
    for (cell_idx, members) in &grid {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                if !overlaps(i, j) {
                    continue;
                }
                // Report each pair only from the lowest shared cell.
                let (ai, _) = cell_range(&boxes[i].0, &boxes[i].1);
                let (aj, _) = cell_range(&boxes[j].0, &boxes[j].1);
                let mut first = [0i64; 3];
                for d in 0..n {
                    first[d] = ai[d].max(aj[d]);
                }
                if &first == cell_idx {
                    pairs.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

fn for_each_cell(a: [i64; 3], b: [i64; 3], n: usize, mut f: impl FnMut([i64; 3])) {
    let mut c = a;
    loop {
        f(c);
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            c[d] += 1;
            if c[d] <= b[d] {
                break;
            }
            c[d] = a[d];
            d += 1;
        }
    }
}

/// Whether `conv(a) ∩ conv(b)` equals the face spanned by the shared vertices.
///
/// Solved as a linear program: maximize the total barycentric weight that a
/// common point puts on the non-shared vertices of `a`; the intersection is
/// proper iff that maximum is zero (or the simplices are disjoint).
pub fn intersect_properly(c: &SimplicialComplex, a: &[VertexId], b: &[VertexId]) -> bool {
    let n = c.ambient_dim();
    let shared: smallvec::SmallVec<[VertexId; 4]> =
        a.iter().copied().filter(|v| b.contains(v)).collect();

    // Two full-dimensional simplices sharing a facet: opposite sides test.
    if a.len() == n + 1 && b.len() == n + 1 && shared.len() == n {
        let pa = *a.iter().find(|v| !shared.contains(v)).unwrap();
        let pb = *b.iter().find(|v| !shared.contains(v)).unwrap();
        let mut verts: smallvec::SmallVec<[Point; 4]> =
            shared.iter().map(|&v| c.vertex(v)).collect();
        verts.push(c.vertex(pa));
        let oa = orientation(&verts);
        *verts.last_mut().unwrap() = c.vertex(pb);
        let ob = orientation(&verts);
        return oa * ob < 0.0;
    }

    let pts_a = c.positions(a);
    let pts_b = c.positions(b);
    let mut center = Point::zero(n);
    let mut count = 0.0;
    for p in pts_a.iter().chain(pts_b.iter()) {
        center += *p;
        count += 1.0;
    }
    center = center * (1.0 / count);
    let scale = pts_a
        .iter()
        .chain(pts_b.iter())
        .fold(0.0f64, |m, p| m.max((*p - center).norm_inf()))
        .max(f64::MIN_POSITIVE);
    let cols = a.len() + b.len();
    let mut rows = vec![vec![0.0; cols]; n + 2];
    for d in 0..n {
        for (j, p) in pts_a.iter().enumerate() {
            rows[d][j] = (p[d] - center[d]) / scale;
        }
        for (j, p) in pts_b.iter().enumerate() {
            rows[d][a.len() + j] = -(p[d] - center[d]) / scale;
        }
    }
    for j in 0..a.len() {
        rows[n][j] = 1.0;
    }
    for j in 0..b.len() {
        rows[n + 1][a.len() + j] = 1.0;
    }
    let mut rhs = vec![0.0; n + 2];
    rhs[n] = 1.0;
    rhs[n + 1] = 1.0;
    let cost: Vec<f64> = a
        .iter()
        .map(|v| if shared.contains(v) { 0.0 } else { 1.0 })
        .chain(std::iter::repeat(0.0).take(b.len()))
        .collect();
    match lp::maximize(&rows, &rhs, &cost) {
        LpOutcome::Infeasible => true,
        LpOutcome::Optimal(v) => v <= 1e-9,
        LpOutcome::Unbounded => false,
    }
}
