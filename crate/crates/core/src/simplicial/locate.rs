use std::collections::HashMap;

use super::complex::{SimplexId, SimplicialComplex};
use super::simplex::{barycentric, BarycentricCoords};
use super::Point;

/// Barycentric coordinates down to this value still count as inside.
const LOCATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LocatedPoint {
    pub simplex: SimplexId,
    pub bary: BarycentricCoords,
}

/// Bucket grid over the top-dimensional simplices of a complex.
#[derive(Clone, Debug)]
pub struct PointLocator {
    n: usize,
    dim: usize,
    origin: Point,
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<u32>>,
}

impl PointLocator {
    pub fn new(c: &SimplicialComplex) -> Self {
        let n = c.ambient_dim();
        let dim = c.dim();
        let count = c.count(dim);
        let mut origin = Point::zero(n);
        let mut extent = 0.0;
        let mut boxes = Vec::with_capacity(count);
        for s in c.iter_dim(dim) {
            let pts = c.positions(s);
            let mut lo = pts[0];
            let mut hi = pts[0];
            for p in &pts[1..] {
                for d in 0..n {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            extent += (hi - lo).norm_inf();
            boxes.push((lo, hi));
        }
        if let Some((first, _)) = boxes.first() {
            origin = *first;
            for (lo, _) in &boxes {
                for d in 0..n {
                    origin[d] = origin[d].min(lo[d]);
                }
            }
        }
        let cell = if count > 0 {
            (extent / count as f64).max(1e-12)
        } else {
            1.0
        };
        let mut loc = Self {
            n,
            dim,
            origin,
            cell,
            buckets: HashMap::new(),
        };
        for (i, (lo, hi)) in boxes.iter().enumerate() {
            let a = loc.bucket_of(lo, -1e-9 * cell);
            let b = loc.bucket_of(hi, 1e-9 * cell);
            let mut idx = a;
            'outer: loop {
                loc.buckets.entry(idx).or_default().push(i as u32);
                let mut d = 0;
                loop {
                    if d == n {
                        break 'outer;
                    }
                    idx[d] += 1;
                    if idx[d] <= b[d] {
                        break;
                    }
                    idx[d] = a[d];
                    d += 1;
                }
            }
        }
        loc
    }

    fn bucket_of(&self, p: &Point, pad: f64) -> [i64; 3] {
        let mut b = [0i64; 3];
        for d in 0..self.n {
            b[d] = ((p[d] + pad - self.origin[d]) / self.cell).floor() as i64;
        }
        b
    }

    /// A top simplex containing `p`; among several, the one in which `p` is
    /// most interior.
    pub fn locate(&self, c: &SimplicialComplex, p: &Point) -> Option<LocatedPoint> {
        let candidates = self.buckets.get(&self.bucket_of(p, 0.0))?;
        let mut best: Option<LocatedPoint> = None;
        let mut best_min = -LOCATE_TOL;
        for &i in candidates {
            let verts = c.positions(c.simplex(self.dim, i as usize));
            let Ok(bary) = barycentric(&verts, p) else {
                continue;
            };
            let m = bary.min();
            if m >= best_min {
                best_min = m;
                best = Some(LocatedPoint {
                    simplex: SimplexId::new(self.dim, i as usize),
                    bary,
                });
            }
        }
        best
    }
}

/// One-off point location (builds a throwaway locator).
pub fn locate_point_in_complex(c: &SimplicialComplex, p: &Point) -> Option<LocatedPoint> {
    PointLocator::new(c).locate(c, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::Simplex;

    fn square() -> SimplicialComplex {
        let verts = vec![
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 0.0),
            Point::xy(1.0, 1.0),
            Point::xy(0.0, 1.0),
        ];
        SimplicialComplex::from_maximal(
            2,
            verts,
            [Simplex::new(&[0, 1, 2]), Simplex::new(&[0, 2, 3])],
        )
        .unwrap()
    }

    #[test]
    fn barycenter_and_outside() {
        let c = square();
        let loc = PointLocator::new(&c);
        let hit = loc.locate(&c, &Point::xy(2.0 / 3.0, 1.0 / 3.0)).unwrap();
        assert_eq!(hit.simplex, SimplexId::new(2, 0));
        for l in hit.bary.as_slice() {
            assert!((l - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(loc.locate(&c, &Point::xy(3.0, 3.0)).is_none());
        assert!(locate_point_in_complex(&c, &Point::xy(-0.1, 0.5)).is_none());
    }

    #[test]
    fn shared_edge_gives_same_pl_value() {
        let c = square();
        let values = [0.0, 1.0, 5.0, -2.0];
        let p = Point::xy(0.3, 0.3);
        let mut seen = Vec::new();
        for i in 0..2 {
            let verts = c.positions(c.simplex(2, i));
            let b = barycentric(&verts, &p).unwrap();
            let v: f64 = c
                .simplex(2, i)
                .iter()
                .zip(b.as_slice())
                .map(|(&id, l)| values[id as usize] * l)
                .sum();
            seen.push(v);
        }
        assert!((seen[0] - seen[1]).abs() < 1e-12);
        assert!(locate_point_in_complex(&c, &p).is_some());
    }
}
