use smallvec::SmallVec;

use super::ApproxError;
use crate::domain::{box_distance, DomainE, FieldSpec};
use crate::simplicial::{distance_to_hull, Point, Vector};
use crate::triangulate::{for_each_in_box, ClassifiedTriangulation, Cover};

/// Partition of unity subordinate to {B \ Q : B in the cover} and W = E°.
///
/// Numerators: `ν_V(x) = max(0, min(R - |x - z_V|_∞, d(x, Q)))` and
/// `ν_W(x) = d(x, closure of the complement of E°)` (capped at R).
#[derive(Clone, Copy, Debug)]
pub struct PartitionOfUnity<'a> {
    ct: &'a ClassifiedTriangulation,
    cover: &'a Cover,
    domain: &'a DomainE,
}

/// Values of the partition at a point: φ_W and the nonzero φ_V.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionValue {
    pub w: f64,
    /// Cover member index and φ_V, for every member with φ_V > 0.
    pub members: SmallVec<[(u32, f64); 16]>,
}

impl PartitionValue {
    pub fn sum(&self) -> f64 {
        self.w + self.members.iter().map(|m| m.1).sum::<f64>()
    }
}

/// Cover members active at a point have centers within `R = 3s` in the sup
/// norm, so in lattice cells at most this many steps away.
const MEMBER_REACH: i64 = 3;

impl<'a> PartitionOfUnity<'a> {
    pub fn new(ct: &'a ClassifiedTriangulation, cover: &'a Cover, domain: &'a DomainE) -> Self {
        Self { ct, cover, domain }
    }

    pub fn radius(&self) -> f64 {
        self.cover.radius
    }

    /// Euclidean distance from `x` to Q, or `cap` if that is smaller.
    ///
    /// Keep simplices sit in their lattice cells. Cells are visited in
    /// shells of growing sup-distance r from the cell of `x`; every cell of
    /// shell r is at least `(r - 1) s` away.
    pub fn distance_to_q(&self, x: &Point, cap: f64) -> f64 {
        let tri = &self.ct.tri;
        let n = tri.n();
        let s = tri.lattice.spacing;
        let per = tri.simplices_per_cell();
        let c = tri.lattice.cell_of_point(x);
        let mut best = cap;
        for r in 0i64.. {
            if best == 0.0 || (r - 1) as f64 * s >= best {
                break;
            }
            let mut lo = c;
            let mut hi = c;
            for d in 0..n {
                lo[d] -= r;
                hi[d] += r;
            }
            for_each_in_box(n, lo, hi, |q| {
                if (0..n).all(|d| (q[d] - c[d]).abs() < r) || best == 0.0 {
                    return;
                }
                let Some(slot) = tri.cell_slot(&q) else {
                    return;
                };
                let a = tri.lattice.node_point(&q);
                let mut b = a;
                for d in 0..n {
                    b[d] += s;
                }
                let to_box = box_distance(x, &a, &b);
                if to_box >= best {
                    return;
                }
                // A cell made of Keep simplices only is the whole cube.
                if (0..per).all(|j| self.ct.labels[slot * per + j].is_keep()) {
                    best = to_box;
                    return;
                }
                for j in 0..per {
                    let i = slot * per + j;
                    if self.ct.labels[i].is_keep() {
                        let pts = tri.complex.positions(tri.top_simplex(i));
                        best = best.min(distance_to_hull(&pts, x));
                    }
                }
            });
        }
        best
    }

    /// Unnormalized numerators (ν_W, [(member, ν_V)]).
    pub fn numerators(&self, x: &Point) -> (f64, SmallVec<[(u32, f64); 16]>) {
        let r = self.cover.radius;
        let mut active: SmallVec<[(u32, f64); 16]> = SmallVec::new();
        self.cover.members_near(x, MEMBER_REACH, |m, member| {
            let a = r - member.center.distance_inf(x);
            if a > 0.0 {
                active.push((m as u32, a));
            }
        });
        if !active.is_empty() {
            let cap = active.iter().map(|m| m.1).fold(0.0, f64::max);
            let dq = self.distance_to_q(x, cap);
            for m in active.iter_mut() {
                m.1 = m.1.min(dq);
            }
            active.retain(|m| m.1 > 0.0);
        }
        let w = self.domain.distance_to_non_interior(x, r);
        (w, active)
    }

    pub fn eval(&self, x: &Point) -> Result<PartitionValue, ApproxError> {
        let (w, mut members) = self.numerators(x);
        let total = w + members.iter().map(|m| m.1).sum::<f64>();
        if total <= 0.0 {
            return Err(ApproxError::PartitionDegenerate(*x));
        }
        for m in members.iter_mut() {
            m.1 /= total;
        }
        Ok(PartitionValue {
            w: w / total,
            members,
        })
    }

    /// g̃(x) = φ_W(x) f(x) + Σ φ_V(x) f(z_V); the first term only where
    /// φ_W(x) > 0.
    pub fn g_tilde(&self, f: &FieldSpec, x: &Point) -> Result<Vector, ApproxError> {
        self.combine(f, x, |m| Ok(f.eval(&self.cover.members[m].center)?))
    }

    fn combine(
        &self,
        f: &FieldSpec,
        x: &Point,
        center_value: impl Fn(usize) -> Result<Vector, ApproxError>,
    ) -> Result<Vector, ApproxError> {
        let phi = self.eval(x)?;
        let mut out = Vector::zero(x.dim());
        if phi.w > 0.0 {
            out = f.eval(x)? * phi.w;
        }
        for &(m, p) in &phi.members {
            out += center_value(m as usize)? * p;
        }
        Ok(out)
    }

    /// Whether `x` lies in a Keep simplex (so g̃(x) = f(x)).
    pub fn in_q(&self, x: &Point) -> bool {
        self.distance_to_q(x, 1.0) == 0.0
    }
}

/// g̃ with f evaluated once at every cover center.
pub struct GTilde<'a> {
    pu: PartitionOfUnity<'a>,
    f: &'a FieldSpec,
    centers: Vec<Vector>,
}

impl<'a> GTilde<'a> {
    pub fn new(pu: PartitionOfUnity<'a>, f: &'a FieldSpec) -> Result<Self, ApproxError> {
        let centers = pu
            .cover
            .members
            .iter()
            .map(|m| f.eval(&m.center))
            .collect::<Result<_, _>>()?;
        Ok(Self { pu, f, centers })
    }

    pub fn eval(&self, x: &Point) -> Result<Vector, ApproxError> {
        self.pu.combine(self.f, x, |m| Ok(self.centers[m]))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{repaired, square_domain};
    use super::*;
    use crate::domain::FieldSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partition_properties() {
        let cells: Vec<[i64; 3]> = (0..3)
            .flat_map(|i| (0..3).map(move |j| [i, j, 0]))
            .collect();
        let mut cells = cells;
        cells.retain(|c| *c != [2, 2, 0]);
        let d = square_domain(3, &cells);
        let (ct, cover) = repaired(&d, 5);
        let pu = PartitionOfUnity::new(&ct, &cover, &d);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut q_hits = 0;
        for _ in 0..3000 {
            // Uniform in the bounding box of P, kept if some simplex of L holds it.
            let x = Point::xy(rng.random_range(-0.2..3.2), rng.random_range(-0.2..3.2));
            if super::super::retract::locate_in_l(&ct, &x).is_none() {
                continue;
            }
            let phi = pu.eval(&x).unwrap();
            assert!((phi.sum() - 1.0).abs() < 1e-9);
            assert!(phi.w >= 0.0 && phi.members.iter().all(|m| m.1 > 0.0));
            if !d.point_in_interior(&x) {
                assert_eq!(phi.w, 0.0);
            }
            for &(m, _) in &phi.members {
                assert!(cover.members[m as usize].contains(&x));
            }
            if pu.in_q(&x) {
                q_hits += 1;
                assert_eq!(phi.w, 1.0);
                assert!(phi.members.is_empty());
            }
        }
        assert!(q_hits > 100);
        // Boundary samples of E: φ_W = 0.
        for t in 0..50 {
            let x = Point::xy(3.0, t as f64 * 0.04);
            assert_eq!(pu.eval(&x).unwrap().w, 0.0);
        }
    }

    #[test]
    fn g_tilde_is_f_on_q_and_bounded_off_e() {
        let cells: Vec<[i64; 3]> = (0..3)
            .flat_map(|i| (0..3).map(move |j| [i, j, 0]))
            .collect();
        let d = square_domain(3, &cells);
        let (ct, cover) = repaired(&d, 5);
        let pu = PartitionOfUnity::new(&ct, &cover, &d);
        let f = FieldSpec::parse(&["x1 + 2".into(), "x2 * x1".into()]).unwrap();
        let x = Point::xy(1.5, 1.5);
        assert_eq!(pu.g_tilde(&f, &x).unwrap(), f.eval(&x).unwrap());
        // Outside E only centers contribute: a convex combination of f(z_V).
        let x = Point::xy(3.05, 1.5);
        let g = pu.g_tilde(&f, &x).unwrap();
        let phi = pu.eval(&x).unwrap();
        assert_eq!(phi.w, 0.0);
        let bound = phi
            .members
            .iter()
            .map(|&(m, _)| f.eval(&cover.members[m as usize].center).unwrap().norm())
            .fold(0.0, f64::max);
        assert!(g.norm() <= bound + 1e-12);
        let cached = GTilde::new(pu, &f).unwrap();
        for x in [
            Point::xy(3.05, 1.5),
            Point::xy(0.01, 2.2),
            Point::xy(1.5, 1.5),
        ] {
            assert_eq!(cached.eval(&x).unwrap(), pu.g_tilde(&f, &x).unwrap());
        }
    }
}
