//! Triangulated neighbourhood of E, the cover it is subordinate to, the
//! Keep/Discard/Bad classification of its top simplices, and the repair that
//! removes every Bad simplex by moving boundary vertices out of E.

mod cover;
mod lattice;
mod repair;

use smallvec::SmallVec;

pub use cover::{build_cover, Cover, CoverMember};
pub(crate) use lattice::for_each_in_box;
pub use lattice::TriLattice;
pub use repair::{repair_bad_simplices, RepairReport, VertexPerturbation};

use crate::domain::{DomainE, GridIndex};
use crate::simplicial::{Point, Simplex, SimplicialComplex, VertexId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TriangulateError {
    #[error("resource cap exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
    #[error("vertex {vertex} could not be moved out of E before the halving floor")]
    HalvingFloor { vertex: VertexId },
    #[error("no witness point found for simplex {simplex}")]
    WitnessNotFound { simplex: usize },
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// Classification of a top simplex.
#[derive(Clone, Debug, PartialEq)]
pub enum Label {
    /// The simplex lies in E°.
    Keep,
    /// The stored point is interior to the simplex and not in E.
    Discard(Point),
    /// Neither yet; the vertices lying on the boundary of E.
    Bad(SmallVec<[VertexId; 4]>),
}

impl Label {
    pub fn is_keep(&self) -> bool {
        matches!(self, Label::Keep)
    }

    pub fn is_bad(&self) -> bool {
        matches!(self, Label::Bad(_))
    }

    pub fn witness(&self) -> Option<Point> {
        match self {
            Label::Discard(w) => Some(*w),
            _ => None,
        }
    }
}

/// Freudenthal (Kuhn) triangulation of the lattice cells of P: the cells
/// whose closed box meets E.
#[derive(Clone, Debug)]
pub struct Triangulation {
    pub lattice: TriLattice,
    /// Lattice index of every cell of P, row-major order.
    pub cells: Vec<GridIndex>,
    cell_slot: Vec<u32>,
    node_slot: Vec<u32>,
    /// Lattice node of every vertex.
    pub vertex_nodes: Vec<GridIndex>,
    /// The complex L; its top simplices are stored cell by cell, `n!` per
    /// cell, each positively oriented.
    pub complex: SimplicialComplex,
}

const NONE: u32 = u32::MAX;

/// Default cap on the number of top simplices.
pub const DEFAULT_MAX_SIMPLICES: u128 = 6_000_000;

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn permutations(n: usize) -> Vec<SmallVec<[usize; 3]>> {
    let mut out: Vec<SmallVec<[usize; 3]>> = vec![SmallVec::new()];
    for i in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, i);
                next.push(q);
            }
        }
        out = next;
    }
    out.sort();
    out
}

fn is_odd(p: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Triangulates the union P of lattice cells (spacing `h / k`) whose closed
/// box meets E.
pub fn base_triangulation(
    domain: &DomainE,
    k: i64,
    max_simplices: u128,
) -> Result<Triangulation, TriangulateError> {
    assert!(k >= 1);
    let lattice = TriLattice::new(domain, k);
    let n = lattice.n;
    let per_cell = factorial(n);
    let dense_cap = 400_000_000u128.max(max_simplices);
    if lattice.node_total() > dense_cap {
        return Err(TriangulateError::ResourceCap {
            what: "lattice nodes",
            requested: lattice.node_total(),
            cap: dense_cap,
        });
    }

    // Mark the cells of P.
    let mut in_p = vec![false; lattice.cell_total() as usize];
    let mut mark = |lo: GridIndex, hi: GridIndex| {
        let mut a = lo;
        let mut b = hi;
        for d in 0..n {
            a[d] -= 1;
            b[d] = b[d].min(lattice.dims[d] - 1);
            a[d] = a[d].max(0);
        }
        // Node range [lo, hi] touches cells lo-1 ..= hi.
        for_each_in_box(n, a, b, |c| in_p[lattice.cell_linear(&c)] = true);
    };
    for c in domain.cells() {
        let face = crate::domain::GridFace {
            anchor: *c,
            mask: (1 << n) - 1,
        };
        let (lo, hi) = lattice.face_node_range(&face);
        mark(lo, hi);
    }
    for f in domain.lower_faces() {
        let (lo, hi) = lattice.face_node_range(f);
        mark(lo, hi);
    }
    let count = in_p.iter().filter(|&&b| b).count();
    let requested = (count * per_cell) as u128;
    if requested > max_simplices {
        return Err(TriangulateError::ResourceCap {
            what: "top simplices",
            requested,
            cap: max_simplices,
        });
    }

    let mut cells = Vec::with_capacity(count);
    let mut cell_slot = vec![NONE; in_p.len()];
    let mut hi = [0i64; 3];
    for d in 0..n {
        hi[d] = lattice.dims[d] - 1;
    }
    for_each_in_box(n, [0; 3], hi, |c| {
        let lin = lattice.cell_linear(&c);
        if in_p[lin] {
            cell_slot[lin] = cells.len() as u32;
            cells.push(c);
        }
    });
    drop(in_p);

    // Vertices: nodes of P cells, numbered in row-major node order.
    let mut used = vec![false; lattice.node_total() as usize];
    for c in &cells {
        let mut top = *c;
        for x in top[..n].iter_mut() {
            *x += 1;
        }
        for_each_in_box(n, *c, top, |v| used[lattice.node_linear(&v)] = true);
    }
    let mut node_slot = vec![NONE; used.len()];
    let mut vertex_nodes = Vec::new();
    let mut vertices = Vec::new();
    for d in 0..n {
        hi[d] = lattice.dims[d];
    }
    for_each_in_box(n, [0; 3], hi, |v| {
        let lin = lattice.node_linear(&v);
        if used[lin] {
            node_slot[lin] = vertex_nodes.len() as u32;
            vertex_nodes.push(v);
            vertices.push(lattice.node_point(&v));
        }
    });
    drop(used);

    let perms = permutations(n);
    let mut simplices = Vec::with_capacity(cells.len() * per_cell);
    for c in &cells {
        for p in &perms {
            let mut node = *c;
            let mut ids: SmallVec<[VertexId; 4]> = SmallVec::new();
            ids.push(node_slot[lattice.node_linear(&node)]);
            for &axis in p {
                node[axis] += 1;
                ids.push(node_slot[lattice.node_linear(&node)]);
            }
            if is_odd(p) {
                ids.swap(n - 1, n);
            }
            simplices.push(Simplex::new(&ids));
        }
    }
    let complex = SimplicialComplex::from_maximal(n, vertices, simplices)
        .map_err(|e| TriangulateError::Internal(e.to_string()))?;
    Ok(Triangulation {
        lattice,
        cells,
        cell_slot,
        node_slot,
        vertex_nodes,
        complex,
    })
}

impl Triangulation {
    pub fn n(&self) -> usize {
        self.lattice.n
    }

    pub fn simplices_per_cell(&self) -> usize {
        factorial(self.lattice.n)
    }

    pub fn top_count(&self) -> usize {
        self.complex.count(self.n())
    }

    /// Slot (index into `cells`) of the cell holding top simplex `i`.
    pub fn cell_of_simplex(&self, i: usize) -> usize {
        i / self.simplices_per_cell()
    }

    pub fn cell_slot(&self, c: &GridIndex) -> Option<usize> {
        if !self.lattice.contains_cell(c) {
            return None;
        }
        let s = self.cell_slot[self.lattice.cell_linear(c)];
        (s != NONE).then_some(s as usize)
    }

    pub fn vertex_at_node(&self, v: &GridIndex) -> Option<VertexId> {
        if !(0..self.n()).all(|d| v[d] >= 0 && v[d] <= self.lattice.dims[d]) {
            return None;
        }
        let s = self.node_slot[self.lattice.node_linear(v)];
        (s != NONE).then_some(s)
    }

    pub fn top_simplex(&self, i: usize) -> &[VertexId] {
        self.complex.simplex(self.n(), i)
    }

    /// Top simplices of the P cells within `reach` cells of `p`'s cell.
    pub fn candidates_near(&self, p: &Point, reach: i64) -> SmallVec<[u32; 64]> {
        let n = self.n();
        let c = self.lattice.cell_of_point(p);
        let mut lo = c;
        let mut hi = c;
        for d in 0..n {
            lo[d] -= reach;
            hi[d] += reach;
        }
        let per = self.simplices_per_cell();
        let mut out = SmallVec::new();
        for_each_in_box(n, lo, hi, |q| {
            if let Some(slot) = self.cell_slot(&q) {
                for j in 0..per {
                    out.push((slot * per + j) as u32);
                }
            }
        });
        out
    }
}

/// A triangulation of P with a label per top simplex.
#[derive(Clone, Debug)]
pub struct ClassifiedTriangulation {
    pub tri: Triangulation,
    pub labels: Vec<Label>,
}

impl ClassifiedTriangulation {
    pub fn count(&self, pred: impl Fn(&Label) -> bool) -> usize {
        self.labels.iter().filter(|l| pred(l)).count()
    }
}

/// Labels every top simplex of the unperturbed triangulation.
///
/// A simplex in a cell outside E is Discard, witnessed by its barycenter (the
/// open cell misses E, whose lower faces lie on the grid skeleton). A simplex
/// in a full cell is Keep iff all its vertices are in E°: a point of the
/// simplex on a boundary face of the cell would force a vertex onto that
/// face. Otherwise it is Bad and its vertices on the boundary are recorded.
pub fn classify_simplices(
    tri: Triangulation,
    domain: &DomainE,
) -> Result<ClassifiedTriangulation, TriangulateError> {
    let n = tri.n();
    let per = tri.simplices_per_cell();
    let interior: Vec<bool> = tri
        .vertex_nodes
        .iter()
        .map(|v| domain.face_in_interior(&tri.lattice.node_face(v)))
        .collect();
    let mut labels = Vec::with_capacity(tri.top_count());
    for (slot, c) in tri.cells.iter().enumerate() {
        let full = domain.is_full_cell(&tri.lattice.domain_cell(c));
        for j in 0..per {
            let i = slot * per + j;
            let s = tri.top_simplex(i);
            let label = if !full {
                let w =
                    Point::combination(&tri.complex.positions(s), &[1.0 / (n + 1) as f64; 4][..=n]);
                if domain.point_in_e(&w) {
                    return Err(TriangulateError::Internal(format!(
                        "barycenter of simplex {i} lies in E"
                    )));
                }
                Label::Discard(w)
            } else {
                let boundary: SmallVec<[VertexId; 4]> = s
                    .iter()
                    .copied()
                    .filter(|&v| !interior[v as usize])
                    .collect();
                if boundary.is_empty() {
                    Label::Keep
                } else {
                    Label::Bad(boundary)
                }
            };
            labels.push(label);
        }
    }
    Ok(ClassifiedTriangulation { tri, labels })
}
