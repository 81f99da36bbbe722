use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use super::partition::GTilde;
use super::{ApproxError, ComplexK, PartitionOfUnity, Retracted};
use crate::domain::FieldSpec;
use crate::simplicial::{subdivide_uniform, Point, Subdivision, Vector, VertexId};
use crate::triangulate::ClassifiedTriangulation;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapOptions {
    pub levels_cap: u32,
    /// Required bound on the sampled snap error.
    pub budget: f64,
    pub seed: u64,
    /// Random samples per maximal simplex, on top of the barycenter and the
    /// edge midpoints.
    pub random_samples: usize,
    /// Cap on the number of top simplices of K̂.
    pub max_simplices: u128,
}

/// The PL interpolant of g̃ on a uniform subdivision K̂ of K.
#[derive(Clone, Debug)]
pub struct ApproximantG {
    pub sub: Subdivision,
    /// g̃ at every vertex of K̂.
    pub values: Vec<Vector>,
    pub levels: u32,
    /// Sampled max of |g̃ - interpolant| over the maximal simplices of K̂.
    pub snap_error: f64,
    /// (n-1)-simplices of K̂ that are not faces of an n-simplex of K̂.
    pub lower_maximal: Vec<u32>,
}

impl ApproximantG {
    pub fn n(&self) -> usize {
        self.sub.complex.ambient_dim()
    }

    pub fn complex(&self) -> &crate::simplicial::SimplicialComplex {
        &self.sub.complex
    }

    /// Number of n-simplices of K̂ (the part of K̂ covering Q).
    pub fn a_count(&self) -> usize {
        let n = self.n();
        if self.sub.complex.dim() == n {
            self.sub.complex.count(n)
        } else {
            0
        }
    }

    /// Interpolated value at the point with barycentric coordinates `bary`
    /// in the K simplex with vertex ids `ids` (any order).
    pub fn eval_in_k_simplex(&self, ids: &[VertexId], bary: &[f64]) -> Option<Vector> {
        let mut pairs: SmallVec<[(VertexId, f64); 4]> =
            ids.iter().copied().zip(bary.iter().copied()).collect();
        pairs.sort_unstable_by_key(|p| p.0);
        let sorted: SmallVec<[VertexId; 4]> = pairs.iter().map(|p| p.0).collect();
        let weights: SmallVec<[f64; 4]> = pairs.iter().map(|p| p.1).collect();
        let (child, w) = self.sub.locate_child(&sorted, &weights)?;
        Some(self.interpolate(&child, &w))
    }

    pub fn interpolate(&self, ids: &[VertexId], weights: &[f64]) -> Vector {
        let mut out = Vector::zero(self.n());
        for (&v, &w) in ids.iter().zip(weights) {
            out += self.values[v as usize] * w;
        }
        out
    }

    /// Interpolated value at a retracted point.
    pub fn eval_retracted(&self, ct: &ClassifiedTriangulation, r: &Retracted) -> Option<Vector> {
        let ids = ct.tri.top_simplex(r.simplex as usize);
        match r.facet {
            None => self.eval_in_k_simplex(ids, &r.bary),
            Some(j) => {
                let f: SmallVec<[VertexId; 4]> = ids
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != j)
                    .map(|(_, &v)| v)
                    .collect();
                let b: SmallVec<[f64; 4]> = r
                    .bary
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != j)
                    .map(|(_, &x)| x)
                    .collect();
                self.eval_in_k_simplex(&f, &b)
            }
        }
    }

    /// Every maximal simplex of K̂ as (dimension, index).
    pub fn maximal_simplices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..self.a_count())
            .map(move |i| (n, i))
            .chain(self.lower_maximal.iter().map(move |&i| (n - 1, i as usize)))
    }
}

/// Random point of the standard simplex (uniform), as barycentric weights.
fn random_bary(rng: &mut ChaCha8Rng, k: usize) -> SmallVec<[f64; 4]> {
    let mut w: SmallVec<[f64; 4]> = (0..=k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    w
}

fn sample_weights(k: usize, rng: &mut ChaCha8Rng, random: usize) -> Vec<SmallVec<[f64; 4]>> {
    let mut out = Vec::with_capacity(1 + k * (k + 1) / 2 + random);
    out.push((0..=k).map(|_| 1.0 / (k + 1) as f64).collect());
    for a in 0..=k {
        for b in a + 1..=k {
            let mut w: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, k + 1);
            w[a] = 0.5;
            w[b] = 0.5;
            out.push(w);
        }
    }
    for _ in 0..random {
        out.push(random_bary(rng, k));
    }
    out
}

fn lower_maximal(kc: &ComplexK, sub: &Subdivision) -> Vec<u32> {
    let n = kc.n();
    let k = &kc.complex;
    let kh = &sub.complex;
    if kh.dim() < n {
        return (0..kh.count(n - 1) as u32).collect();
    }
    // Facets of K lying in some n-simplex of K.
    let mut in_a = vec![false; k.count(n - 1)];
    for s in k.iter_dim(n) {
        for skip in 0..=n {
            let f: SmallVec<[VertexId; 4]> = s
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .map(|(_, &v)| v)
                .collect();
            if let Some(id) = k.find(&f) {
                in_a[id.index as usize] = true;
            }
        }
    }
    let mut out = Vec::new();
    for (i, s) in kh.iter_dim(n - 1).enumerate() {
        let carrier = if sub.levels == 0 {
            k.find(s)
        } else {
            sub.carrier(k, s)
        };
        if let Some(c) = carrier {
            if c.dim as usize == n - 1 && !in_a[c.index as usize] {
                out.push(i as u32);
            }
        }
    }
    out
}

/// Subdivides K until the sampled distance between g̃ and its PL
/// interpolant drops below the budget.
pub fn pl_snap(
    kc: &ComplexK,
    pu: &PartitionOfUnity<'_>,
    f: &FieldSpec,
    opts: &SnapOptions,
) -> Result<ApproximantG, ApproxError> {
    let n = kc.n();
    let gt = GTilde::new(*pu, f)?;
    let mut last_error = f64::INFINITY;
    for levels in 0..=opts.levels_cap {
        let order = 1u128 << levels;
        let top = kc.complex.dim();
        let estimate = kc.complex.count(top) as u128 * order.pow(top as u32);
        if estimate > opts.max_simplices {
            return Err(ApproxError::SubdivisionCap {
                levels,
                simplices: estimate,
                cap: opts.max_simplices,
            });
        }
        let sub = subdivide_uniform(&kc.complex, levels)?;
        let kh = &sub.complex;
        let mut in_q = vec![false; kh.vertices().len()];
        if kh.dim() == n {
            for s in kh.iter_dim(n) {
                for &v in s {
                    in_q[v as usize] = true;
                }
            }
        }
        let mut values = Vec::with_capacity(in_q.len());
        for (v, p) in kh.vertices().iter().enumerate() {
            values.push(if in_q[v] { f.eval(p)? } else { gt.eval(p)? });
        }
        let lower = lower_maximal(kc, &sub);
        let mut g = ApproximantG {
            sub,
            values,
            levels,
            snap_error: 0.0,
            lower_maximal: lower,
        };
        g.snap_error = sampled_snap_error(&g, &gt, f, opts)?;
        if g.snap_error < opts.budget {
            return Ok(g);
        }
        last_error = g.snap_error;
    }
    Err(ApproxError::SnapCap {
        levels: opts.levels_cap,
        error: last_error,
        budget: opts.budget,
    })
}

/// Max of |g̃ - interpolant| at the barycenter, the edge midpoints and
/// seeded random points of every maximal simplex of K̂.
pub(crate) fn sampled_snap_error(
    g: &ApproximantG,
    gt: &GTilde<'_>,
    f: &FieldSpec,
    opts: &SnapOptions,
) -> Result<f64, ApproxError> {
    let kh = g.complex();
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    let simplices: Vec<(usize, usize)> = g.maximal_simplices().collect();
    for (dim, i) in simplices {
        let ids = kh.simplex(dim, i);
        let pts = kh.positions(ids);
        for w in sample_weights(dim, &mut rng, opts.random_samples) {
            let p = Point::combination(&pts, &w);
            let exact = if dim == n { f.eval(&p)? } else { gt.eval(&p)? };
            worst = worst.max((exact - g.interpolate(ids, &w)).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{repaired, square_domain};
    use super::super::{build_k, retract_h};
    use super::*;

    fn opts(cap: u32, budget: f64) -> SnapOptions {
        SnapOptions {
            levels_cap: cap,
            budget,
            seed: 5,
            random_samples: 10,
            max_simplices: 1 << 20,
        }
    }

    #[test]
    fn linear_field_snaps_exactly_on_q() {
        let cells: Vec<[i64; 3]> = (0..3)
            .flat_map(|i| (0..3).map(move |j| [i, j, 0]))
            .collect();
        let d = square_domain(3, &cells);
        let (ct, cover) = repaired(&d, 5);
        let kc = build_k(&ct, &d).unwrap();
        let pu = PartitionOfUnity::new(&ct, &cover, &d);
        let f = FieldSpec::parse(&["2*x1 - x2 + 1".into(), "x1 + 3".into()]).unwrap();
        let g = pl_snap(&kc, &pu, &f, &opts(0, 1.0)).unwrap();
        assert_eq!(g.levels, 0);
        assert_eq!(g.a_count(), kc.keep.len());
        for s in g.complex().iter_dim(2) {
            for &v in s {
                assert_eq!(
                    g.values[v as usize],
                    f.eval(&g.complex().vertex(v)).unwrap()
                );
            }
        }
        // Retracted points in Q evaluate to f up to rounding.
        let z = Point::xy(1.3, 1.7);
        let r = retract_h(&ct, &d, &z).unwrap();
        assert!((g.eval_retracted(&ct, &r).unwrap() - f.eval(&z).unwrap()).norm() < 1e-12);
        assert!(!g.lower_maximal.is_empty());
    }

    #[test]
    fn snap_error_is_second_order() {
        let d = square_domain(2, &[[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]);
        let (ct, cover) = repaired(&d, 5);
        let kc = build_k(&ct, &d).unwrap();
        let pu = PartitionOfUnity::new(&ct, &cover, &d);
        let f = FieldSpec::parse(&["sin(3*x1) * x2".into(), "x1^2 + 1".into()]).unwrap();
        let mut errs = Vec::new();
        let mut whole = Vec::new();
        for levels in 0..3 {
            let sub = subdivide_uniform(&kc.complex, levels).unwrap();
            let values = sub
                .complex
                .vertices()
                .iter()
                .map(|p| pu.g_tilde(&f, p).unwrap())
                .collect();
            let lower = lower_maximal(&kc, &sub);
            let g = ApproximantG {
                sub,
                values,
                levels,
                snap_error: 0.0,
                lower_maximal: lower,
            };
            let gt = GTilde::new(pu, &f).unwrap();
            whole.push(sampled_snap_error(&g, &gt, &f, &opts(0, 1.0)).unwrap());
            // Restrict to Q, where g̃ = f is smooth.
            let mut g_a = g;
            g_a.lower_maximal.clear();
            errs.push(sampled_snap_error(&g_a, &gt, &f, &opts(0, 1.0)).unwrap());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((2.0..=8.0).contains(&ratio), "ratio {ratio} from {errs:?}");
        }
        // On the lower skeleton g̃ is only Lipschitz: refinement still helps.
        assert!(whole[2] < whole[0]);
        let g = pl_snap(&kc, &pu, &f, &opts(2, whole[1] * 1.01)).unwrap();
        assert!(g.levels >= 1);
        assert!(matches!(
            pl_snap(&kc, &pu, &f, &opts(0, errs[0] * 1e-3)),
            Err(ApproxError::SnapCap { .. })
        ));
    }
}
