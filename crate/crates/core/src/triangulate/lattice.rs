use crate::domain::{DomainE, GridFace, GridIndex};
use crate::simplicial::Point;

/// The triangulation grid: spacing `s = h / k` for domain spacing `h`,
/// extended by one domain cell on every side of the domain grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TriLattice {
    pub n: usize,
    /// Refinement factor of the domain grid.
    pub k: i64,
    pub spacing: f64,
    pub origin: Point,
    /// Cells per axis.
    pub dims: [i64; 3],
}

impl TriLattice {
    pub fn new(domain: &DomainE, k: i64) -> Self {
        let g = domain.grid();
        let n = g.n;
        let mut origin = g.origin_point();
        for d in 0..n {
            origin[d] -= g.spacing;
        }
        let mut dims = [1i64; 3];
        for d in 0..n {
            dims[d] = (g.shape[d] as i64 + 2) * k;
        }
        Self {
            n,
            k,
            spacing: g.spacing / k as f64,
            origin,
            dims,
        }
    }

    pub fn cell_total(&self) -> u128 {
        self.dims[..self.n].iter().map(|&d| d as u128).product()
    }

    pub fn node_total(&self) -> u128 {
        self.dims[..self.n].iter().map(|&d| d as u128 + 1).product()
    }

    pub fn contains_cell(&self, c: &GridIndex) -> bool {
        (0..self.n).all(|d| c[d] >= 0 && c[d] < self.dims[d])
    }

    pub fn cell_linear(&self, c: &GridIndex) -> usize {
        let mut idx = 0usize;
        for d in 0..self.n {
            idx = idx * self.dims[d] as usize + c[d] as usize;
        }
        idx
    }

    pub fn node_linear(&self, v: &GridIndex) -> usize {
        let mut idx = 0usize;
        for d in 0..self.n {
            idx = idx * (self.dims[d] as usize + 1) + v[d] as usize;
        }
        idx
    }

    pub fn node_point(&self, v: &GridIndex) -> Point {
        let mut p = self.origin;
        for d in 0..self.n {
            p[d] += v[d] as f64 * self.spacing;
        }
        p
    }

    pub fn cell_center(&self, c: &GridIndex) -> Point {
        let mut p = self.node_point(c);
        for d in 0..self.n {
            p[d] += 0.5 * self.spacing;
        }
        p
    }

    /// Lattice cell whose half-open box contains `p` (may lie outside the lattice).
    pub fn cell_of_point(&self, p: &Point) -> GridIndex {
        let mut c = [0i64; 3];
        for d in 0..self.n {
            c[d] = ((p[d] - self.origin[d]) / self.spacing).floor() as i64;
        }
        c
    }

    /// Domain grid cell containing the lattice cell.
    pub fn domain_cell(&self, c: &GridIndex) -> GridIndex {
        let mut g = [0i64; 3];
        for d in 0..self.n {
            g[d] = c[d].div_euclid(self.k) - 1;
        }
        g
    }

    /// Minimal closed domain-grid face containing a lattice node, computed
    /// exactly in integers.
    pub fn node_face(&self, v: &GridIndex) -> GridFace {
        let mut anchor = [0i64; 3];
        let mut mask = 0u8;
        for d in 0..self.n {
            let shifted = v[d] - self.k;
            anchor[d] = shifted.div_euclid(self.k);
            if shifted.rem_euclid(self.k) != 0 {
                mask |= 1 << d;
            }
        }
        GridFace { anchor, mask }
    }

    /// Lattice node range `[lo, hi]` spanned by a closed domain face.
    pub fn face_node_range(&self, f: &GridFace) -> (GridIndex, GridIndex) {
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for d in 0..self.n {
            lo[d] = (f.anchor[d] + 1) * self.k;
            hi[d] = lo[d] + if f.mask & (1 << d) != 0 { self.k } else { 0 };
        }
        (lo, hi)
    }
}

/// Calls `f` with every index in the box `[lo, hi]` (inclusive), first axis
/// slowest.
pub(crate) fn for_each_in_box(
    n: usize,
    lo: GridIndex,
    hi: GridIndex,
    mut f: impl FnMut(GridIndex),
) {
    if (0..n).any(|d| lo[d] > hi[d]) {
        return;
    }
    let mut c = lo;
    loop {
        f(c);
        let mut d = n;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            c[d] += 1;
            if c[d] <= hi[d] {
                break;
            }
            c[d] = lo[d];
        }
    }
}
