use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DomainError;
use crate::simplicial::Point;

/// Relative tolerance (in units of the spacing) for deciding that a
/// coordinate lies on a grid hyperplane.
pub const GRID_SNAP_TOL: f64 = 1e-12;

/// Integer index of a grid cell or grid node.
pub type GridIndex = [i64; 3];

/// A regular axis-aligned grid: `shape[d]` cells of side `spacing` along each
/// axis, starting at `origin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !(2..=3).contains(&self.n) {
            return Err(DomainError::Invalid(format!(
                "dimension {} is not 2 or 3",
                self.n
            )));
        }
        if self.origin.len() != self.n || self.shape.len() != self.n {
            return Err(DomainError::Invalid(
                "origin and shape must have n entries".into(),
            ));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(DomainError::Invalid("spacing must be positive".into()));
        }
        if self.origin.iter().any(|c| !c.is_finite()) {
            return Err(DomainError::Invalid("origin must be finite".into()));
        }
        if self.shape.contains(&0) {
            return Err(DomainError::Invalid(
                "every extent must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn origin_point(&self) -> Point {
        Point::new(&self.origin).expect("validated grid")
    }

    pub fn shape_array(&self) -> GridIndex {
        let mut s = [1i64; 3];
        for d in 0..self.n {
            s[d] = self.shape[d] as i64;
        }
        s
    }

    pub fn cell_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn contains_cell(&self, c: &GridIndex) -> bool {
        (0..self.n).all(|d| c[d] >= 0 && c[d] < self.shape[d] as i64)
    }

    /// Row-major (last axis fastest) index of an in-grid cell.
    pub fn linear_cell(&self, c: &GridIndex) -> usize {
        let mut idx = 0usize;
        for d in 0..self.n {
            idx = idx * self.shape[d] + c[d] as usize;
        }
        idx
    }

    /// Grid coordinates of a point: `(p - origin) / spacing`.
    pub fn to_grid(&self, p: &Point) -> [f64; 3] {
        let mut u = [0.0; 3];
        for d in 0..self.n {
            u[d] = (p[d] - self.origin[d]) / self.spacing;
        }
        u
    }

    pub fn node_point(&self, idx: &GridIndex) -> Point {
        let mut c = [0.0; 3];
        for d in 0..self.n {
            c[d] = self.origin[d] + idx[d] as f64 * self.spacing;
        }
        Point::new(&c[..self.n]).expect("finite grid node")
    }

    pub fn cell_center(&self, c: &GridIndex) -> Point {
        let mut p = self.node_point(c);
        for d in 0..self.n {
            p[d] += 0.5 * self.spacing;
        }
        p
    }

    /// The minimal closed grid face containing `p`: its anchor node and the
    /// bitmask of axes along which the face extends.
    pub fn minimal_face(&self, p: &Point) -> GridFace {
        let u = self.to_grid(p);
        let mut anchor = [0i64; 3];
        let mut mask = 0u8;
        for d in 0..self.n {
            let r = u[d].round();
            if (u[d] - r).abs() <= GRID_SNAP_TOL * (1.0 + r.abs()) {
                anchor[d] = r as i64;
            } else {
                anchor[d] = u[d].floor() as i64;
                mask |= 1 << d;
            }
        }
        GridFace { anchor, mask }
    }
}

/// A closed face of the grid: the box spanned from node `anchor` by one step
/// along every axis in `mask`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridFace {
    pub anchor: GridIndex,
    pub mask: u8,
}

impl GridFace {
    pub fn dim(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// Closed axis-aligned box of the face in world coordinates. Both
    /// corners are grid nodes, so faces sharing a node agree on it exactly.
    pub fn bounds(&self, g: &GridSpec) -> (Point, Point) {
        let mut far = self.anchor;
        for d in 0..g.n {
            if self.mask & (1 << d) != 0 {
                far[d] += 1;
            }
        }
        (g.node_point(&self.anchor), g.node_point(&far))
    }

    /// Whether `other` is a face of `self` (both closed).
    pub fn contains_face(&self, other: &GridFace, n: usize) -> bool {
        if other.mask & !self.mask != 0 {
            return false;
        }
        (0..n).all(|d| {
            if self.mask & (1 << d) == 0 || other.mask & (1 << d) != 0 {
                other.anchor[d] == self.anchor[d]
            } else {
                other.anchor[d] == self.anchor[d] || other.anchor[d] == self.anchor[d] + 1
            }
        })
    }
}

/// A grid-aligned compact set: union of listed closed cells and listed closed
/// lower-dimensional grid faces.
#[derive(Clone, Debug)]
pub struct DomainE {
    grid: GridSpec,
    cells: Vec<GridIndex>,
    full: Vec<bool>,
    lower: Vec<GridFace>,
    lower_set: HashSet<GridFace>,
}

impl DomainE {
    pub fn new(
        grid: GridSpec,
        cells: Vec<GridIndex>,
        lower: Vec<GridFace>,
    ) -> Result<Self, DomainError> {
        grid.validate()?;
        let n = grid.n;
        let mut full = vec![false; grid.cell_count()];
        let mut cells = cells;
        for c in &mut cells {
            for x in c[n..].iter_mut() {
                *x = 0;
            }
            if !grid.contains_cell(c) {
                return Err(DomainError::Invalid(format!(
                    "cell {:?} outside the grid",
                    &c[..n]
                )));
            }
            full[grid.linear_cell(c)] = true;
        }
        cells.sort_unstable();
        cells.dedup();
        let mut lower = lower;
        for f in &mut lower {
            for x in f.anchor[n..].iter_mut() {
                *x = 0;
            }
            if f.dim() >= n || f.mask >> n != 0 {
                return Err(DomainError::Invalid(
                    "lower faces must have dimension below n".into(),
                ));
            }
            let inside = (0..n).all(|d| {
                let limit = grid.shape[d] as i64 - if f.mask & (1 << d) != 0 { 1 } else { 0 };
                f.anchor[d] >= 0 && f.anchor[d] <= limit
            });
            if !inside {
                return Err(DomainError::Invalid(format!(
                    "lower face at {:?} outside the grid",
                    &f.anchor[..n]
                )));
            }
        }
        lower.sort_unstable();
        lower.dedup();
        if cells.is_empty() && lower.is_empty() {
            return Err(DomainError::Invalid("the domain is empty".into()));
        }
        let lower_set = lower.iter().copied().collect();
        Ok(Self {
            grid,
            cells,
            full,
            lower,
            lower_set,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing
    }

    pub fn cells(&self) -> &[GridIndex] {
        &self.cells
    }

    pub fn lower_faces(&self) -> &[GridFace] {
        &self.lower
    }

    pub fn has_interior(&self) -> bool {
        !self.cells.is_empty()
    }

    /// Whether the cell is a listed full cell; cells outside the grid are not.
    #[inline]
    pub fn is_full_cell(&self, c: &GridIndex) -> bool {
        self.grid.contains_cell(c) && self.full[self.grid.linear_cell(c)]
    }

    pub fn is_lower_face(&self, f: &GridFace) -> bool {
        self.lower_set.contains(f)
    }

    /// Whether the closed grid face `f` is contained in E.
    pub fn face_in_e(&self, f: &GridFace) -> bool {
        let n = self.n();
        let mut found = false;
        for_each_incident_cell(f, n, |c| found |= self.is_full_cell(&c));
        if found {
            return true;
        }
        // Listed lower faces having `f` as a face.
        let free: Vec<usize> = (0..n).filter(|&d| f.mask & (1 << d) == 0).collect();
        for extra in 0u32..(1 << free.len()) {
            let mut g = *f;
            for (bit, &d) in free.iter().enumerate() {
                if extra & (1 << bit) != 0 {
                    g.mask |= 1 << d;
                }
            }
            if g.dim() >= n {
                continue;
            }
            let spanned: Vec<usize> = free
                .iter()
                .enumerate()
                .filter(|(bit, _)| extra & (1 << bit) != 0)
                .map(|(_, &d)| d)
                .collect();
            for shift in 0u32..(1 << spanned.len()) {
                let mut h = g;
                for (bit, &d) in spanned.iter().enumerate() {
                    if shift & (1 << bit) != 0 {
                        h.anchor[d] -= 1;
                    }
                }
                if self.lower_set.contains(&h) {
                    return true;
                }
            }
        }
        false
    }

    /// Whether every closed cell incident to `f` is a listed full cell.
    pub fn face_in_interior(&self, f: &GridFace) -> bool {
        let mut all = true;
        for_each_incident_cell(f, self.n(), |c| all &= self.is_full_cell(&c));
        all
    }

    pub fn point_in_e(&self, p: &Point) -> bool {
        self.face_in_e(&self.grid.minimal_face(p))
    }

    pub fn point_in_interior(&self, p: &Point) -> bool {
        self.face_in_interior(&self.grid.minimal_face(p))
    }

    /// Axis-aligned bounding box of E.
    pub fn bounding_box(&self) -> (Point, Point) {
        let g = &self.grid;
        let n = g.n;
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        let mut grow = |f: &GridFace| {
            for d in 0..n {
                lo[d] = lo[d].min(f.anchor[d]);
                hi[d] = hi[d].max(f.anchor[d] + i64::from(f.mask & (1 << d) != 0));
            }
        };
        for c in &self.cells {
            grow(&GridFace {
                anchor: *c,
                mask: (1 << n) - 1,
            });
        }
        for f in &self.lower {
            grow(f);
        }
        let mut lo_idx = [0i64; 3];
        let mut hi_idx = [0i64; 3];
        lo_idx[..n].copy_from_slice(&lo[..n]);
        hi_idx[..n].copy_from_slice(&hi[..n]);
        (g.node_point(&lo_idx), g.node_point(&hi_idx))
    }

    /// Euclidean distance from `p` to the closure of the complement of E°
    /// (the union of all closed cells that are not listed, including every
    /// cell outside the grid), capped at `cap`.
    pub fn distance_to_non_interior(&self, p: &Point, cap: f64) -> f64 {
        let g = &self.grid;
        let n = g.n;
        let u = g.to_grid(p);
        let reach = (cap / g.spacing).ceil() as i64 + 1;
        let mut best = cap;
        let mut base = [0i64; 3];
        for d in 0..n {
            base[d] = u[d].floor() as i64;
        }
        let mut off = [-reach; 3];
        for x in off[n..].iter_mut() {
            *x = 0;
        }
        loop {
            let mut c = [0i64; 3];
            for d in 0..n {
                c[d] = base[d] + off[d];
            }
            if !self.is_full_cell(&c) {
                let f = GridFace {
                    anchor: c,
                    mask: (1 << n) - 1,
                };
                let (lo, hi) = f.bounds(g);
                best = best.min(box_distance(p, &lo, &hi));
            }
            let mut d = 0;
            loop {
                if d == n {
                    return best;
                }
                off[d] += 1;
                if off[d] <= reach {
                    break;
                }
                off[d] = -reach;
                d += 1;
            }
        }
    }

    /// A point of E nearest to `p` in the Euclidean norm, searched among
    /// the elements of E within `reach` cells of `p`'s cell.
    pub fn nearest_point_in_e(&self, p: &Point, reach: i64) -> Option<Point> {
        let g = &self.grid;
        let n = g.n;
        let u = g.to_grid(p);
        let mut best: Option<(f64, Point)> = None;
        let mut consider = |lo: Point, hi: Point| {
            let q = clamp_to_box(p, &lo, &hi);
            let d = q.distance(p);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, q));
            }
        };
        let mut base = [0i64; 3];
        for d in 0..n {
            base[d] = u[d].floor() as i64;
        }
        let window = |c: &GridIndex| (0..n).all(|d| (c[d] - base[d]).abs() <= reach + 1);
        if self.cells.len() as i64 <= (2 * reach + 1).pow(n as u32) {
            for c in &self.cells {
                if window(c) {
                    let (lo, hi) = GridFace {
                        anchor: *c,
                        mask: (1 << n) - 1,
                    }
                    .bounds(g);
                    consider(lo, hi);
                }
            }
        } else {
            let mut off = [-reach; 3];
            for x in off[n..].iter_mut() {
                *x = 0;
            }
            'cells: loop {
                let mut c = [0i64; 3];
                for d in 0..n {
                    c[d] = base[d] + off[d];
                }
                if self.is_full_cell(&c) {
                    let (lo, hi) = GridFace {
                        anchor: c,
                        mask: (1 << n) - 1,
                    }
                    .bounds(g);
                    consider(lo, hi);
                }
                let mut d = 0;
                loop {
                    if d == n {
                        break 'cells;
                    }
                    off[d] += 1;
                    if off[d] <= reach {
                        break;
                    }
                    off[d] = -reach;
                    d += 1;
                }
            }
        }
        for f in &self.lower {
            if window(&f.anchor) {
                let (lo, hi) = f.bounds(g);
                consider(lo, hi);
            }
        }
        best.map(|(_, q)| q)
    }

    /// A random point of E: uniform in a random listed cell, or (when E has
    /// lower faces, with probability 1/4 or always if there are no cells)
    /// uniform on a random listed lower face.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        let n = self.n();
        let use_lower = !self.lower.is_empty() && (self.cells.is_empty() || rng.random_bool(0.25));
        let face = if use_lower {
            self.lower[rng.random_range(0..self.lower.len())]
        } else {
            GridFace {
                anchor: self.cells[rng.random_range(0..self.cells.len())],
                mask: (1 << n) - 1,
            }
        };
        let (lo, hi) = face.bounds(&self.grid);
        let mut p = lo;
        for d in 0..n {
            if hi[d] > lo[d] {
                p[d] = rng.random_range(lo[d]..=hi[d]);
            }
        }
        p
    }

    /// Closed grid faces of dimension n-1 forming the topological boundary of
    /// the union of full cells.
    pub fn boundary_facets(&self) -> Vec<GridFace> {
        let n = self.n();
        let mut out = Vec::new();
        for c in &self.cells {
            for d in 0..n {
                for side in 0..2 {
                    let mut nb = *c;
                    nb[d] += if side == 0 { -1 } else { 1 };
                    if !self.is_full_cell(&nb) {
                        let mut anchor = *c;
                        anchor[d] += side;
                        out.push(GridFace {
                            anchor,
                            mask: ((1 << n) - 1) & !(1 << d),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Calls `f` for each closed grid cell incident to the face.
pub fn for_each_incident_cell(face: &GridFace, n: usize, mut f: impl FnMut(GridIndex)) {
    let snapped: Vec<usize> = (0..n).filter(|&d| face.mask & (1 << d) == 0).collect();
    for bits in 0u32..(1 << snapped.len()) {
        let mut c = face.anchor;
        for (b, &d) in snapped.iter().enumerate() {
            if bits & (1 << b) != 0 {
                c[d] -= 1;
            }
        }
        f(c);
    }
}

pub fn clamp_to_box(p: &Point, lo: &Point, hi: &Point) -> Point {
    let mut q = *p;
    for d in 0..p.dim() {
        q[d] = q[d].clamp(lo[d], hi[d]);
    }
    q
}

pub fn box_distance(p: &Point, lo: &Point, hi: &Point) -> f64 {
    clamp_to_box(p, lo, hi).distance(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, shape: usize) -> GridSpec {
        GridSpec {
            n,
            origin: vec![0.0; n],
            spacing: 1.0,
            shape: vec![shape; n],
        }
    }

    #[test]
    fn membership_and_interior() {
        // 2x1 block of cells in a 4x4 grid, plus an isolated edge.
        let edge = GridFace {
            anchor: [3, 3, 0],
            mask: 0b01,
        };
        let d = DomainE::new(grid(2, 4), vec![[0, 0, 0], [1, 0, 0]], vec![edge]).unwrap();
        assert!(d.point_in_e(&Point::xy(0.5, 0.5)));
        assert!(d.point_in_interior(&Point::xy(0.5, 0.5)));
        // Shared facet between the two listed cells is interior.
        assert!(d.point_in_interior(&Point::xy(1.0, 0.5)));
        // Facet between listed cell and unlisted cell.
        assert!(d.point_in_e(&Point::xy(0.5, 1.0)));
        assert!(!d.point_in_interior(&Point::xy(0.5, 1.0)));
        // Grid border counts as boundary.
        assert!(!d.point_in_interior(&Point::xy(0.0, 0.5)));
        // Isolated edge: in E, never interior; its endpoints too.
        assert!(d.point_in_e(&Point::xy(3.5, 3.0)));
        assert!(d.point_in_e(&Point::xy(4.0, 3.0)));
        assert!(!d.point_in_interior(&Point::xy(3.5, 3.0)));
        assert!(!d.point_in_e(&Point::xy(3.5, 3.1)));
        assert!(!d.point_in_e(&Point::xy(2.5, 0.5)));
    }

    #[test]
    fn snapping_tolerance() {
        let d = DomainE::new(grid(2, 4), vec![[0, 0, 0]], vec![]).unwrap();
        assert!(d.point_in_e(&Point::xy(1.0 + 1e-13, 0.5)));
        assert!(!d.point_in_e(&Point::xy(1.0 + 1e-9, 0.5)));
    }

    #[test]
    fn distance_to_complement_of_interior() {
        let cells: Vec<GridIndex> = (0..3)
            .flat_map(|i| (0..3).map(move |j| [i, j, 0]))
            .collect();
        let d = DomainE::new(grid(2, 5), cells, vec![]).unwrap();
        assert!((d.distance_to_non_interior(&Point::xy(1.5, 1.5), 10.0) - 1.5).abs() < 1e-15);
        assert!((d.distance_to_non_interior(&Point::xy(1.5, 1.5), 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(d.distance_to_non_interior(&Point::xy(3.0, 1.0), 1.0), 0.0);
    }

    #[test]
    fn nearest_point_and_boundary() {
        let d = DomainE::new(grid(2, 4), vec![[1, 1, 0]], vec![]).unwrap();
        let q = d.nearest_point_in_e(&Point::xy(0.2, 1.5), 2).unwrap();
        assert_eq!(q, Point::xy(1.0, 1.5));
        assert_eq!(d.boundary_facets().len(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DomainE::new(grid(2, 2), vec![[2, 0, 0]], vec![]).is_err());
        assert!(DomainE::new(grid(2, 2), vec![], vec![]).is_err());
        let cell_as_face = GridFace {
            anchor: [0, 0, 0],
            mask: 0b11,
        };
        assert!(DomainE::new(grid(2, 2), vec![], vec![cell_as_face]).is_err());
    }
}
