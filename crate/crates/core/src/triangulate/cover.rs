use super::{for_each_in_box, TriLattice, TriangulateError, Triangulation};
use crate::domain::DomainE;
use crate::simplicial::Point;

/// A sup-norm ball centered at a point of E.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverMember {
    pub center: Point,
    pub radius: f64,
}

impl CoverMember {
    pub fn contains(&self, p: &Point) -> bool {
        self.center.distance_inf(p) < self.radius
    }
}

/// One member per cell of P; top simplex `i` is assigned to the member of
/// its cell, `i / n!`.
#[derive(Clone, Debug)]
pub struct Cover {
    pub members: Vec<CoverMember>,
    pub radius: f64,
    lattice: TriLattice,
    // CSR over all lattice cells: members whose center lies in each cell.
    starts: Vec<u32>,
    order: Vec<u32>,
}

impl Cover {
    pub fn member_of_simplex(&self, tri: &Triangulation, i: usize) -> usize {
        tri.cell_of_simplex(i)
    }

    /// Members whose center lies within `reach` lattice cells of `p`'s cell.
    pub fn members_near(&self, p: &Point, reach: i64, mut f: impl FnMut(usize, &CoverMember)) {
        let lat = &self.lattice;
        let c = lat.cell_of_point(p);
        let mut lo = c;
        let mut hi = c;
        for d in 0..lat.n {
            lo[d] = (lo[d] - reach).max(0);
            hi[d] = (hi[d] + reach).min(lat.dims[d] - 1);
        }
        for_each_in_box(lat.n, lo, hi, |q| {
            let k = lat.cell_linear(&q);
            for &m in &self.order[self.starts[k] as usize..self.starts[k + 1] as usize] {
                f(m as usize, &self.members[m as usize]);
            }
        });
    }
}

/// Builds the cover: for every cell of P a ball of sup-radius `3s` around the
/// point of E nearest to the cell center.
pub fn build_cover(tri: &Triangulation, domain: &DomainE) -> Result<Cover, TriangulateError> {
    let lat = &tri.lattice;
    let radius = 3.0 * lat.spacing;
    let mut members = Vec::with_capacity(tri.cells.len());
    for c in &tri.cells {
        let m = lat.cell_center(c);
        let center = domain.nearest_point_in_e(&m, 1).ok_or_else(|| {
            TriangulateError::Internal(format!(
                "cell {:?} of P has no point of E nearby",
                &c[..lat.n]
            ))
        })?;
        members.push(CoverMember { center, radius });
    }
    let cells = lat.cell_total() as usize;
    let mut starts = vec![0u32; cells + 1];
    let mut keys = Vec::with_capacity(members.len());
    for m in &members {
        let c = lat.cell_of_point(&m.center);
        if !lat.contains_cell(&c) {
            return Err(TriangulateError::Internal(format!(
                "cover center {:?} outside the lattice",
                m.center
            )));
        }
        let k = lat.cell_linear(&c);
        keys.push(k);
        starts[k + 1] += 1;
    }
    for k in 0..cells {
        starts[k + 1] += starts[k];
    }
    let mut fill = starts.clone();
    let mut order = vec![0u32; members.len()];
    for (i, &k) in keys.iter().enumerate() {
        order[fill[k] as usize] = i as u32;
        fill[k] += 1;
    }
    Ok(Cover {
        members,
        radius,
        lattice: lat.clone(),
        starts,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::domain;
    use super::super::*;

    #[test]
    fn cover_contains_assigned_simplices() {
        let d = domain(2, 3, &[[1, 1, 0], [0, 1, 0]]);
        let t = base_triangulation(&d, 3, u128::MAX).unwrap();
        let cover = build_cover(&t, &d).unwrap();
        assert_eq!(cover.members.len(), t.cells.len());
        for i in 0..t.top_count() {
            let m = cover.members[cover.member_of_simplex(&t, i)];
            assert!(d.point_in_e(&m.center));
            for p in t.complex.positions(t.top_simplex(i)) {
                assert!(m.center.distance_inf(&p) <= 1.5 * t.lattice.spacing + 1e-12);
            }
        }
        let probe = t.lattice.cell_center(&t.cells[5]);
        let mut hit = false;
        cover.members_near(&probe, 4, |m, _| hit |= m == 5);
        assert!(hit);
    }
}
