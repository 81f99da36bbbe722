//! Brute-force oracles re-checking the pipeline's claims by sampling. They
//! locate points and intersect rays with their own code, sharing only field
//! evaluation and PL interpolation with the pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::approximate::{ApproximantG, PartitionOfUnity};
use crate::domain::{DomainE, FieldSpec, GridFace};
use crate::simplicial::{barycentric, Point, PointLocator, Vector, VertexId};
use crate::triangulate::{ClassifiedTriangulation, Label};
use crate::zerofree::ZeroFreeMap;

/// A sampled extremum and where it was attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub at: Option<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub seed: u64,
    /// Sample spacing is the domain spacing divided by this.
    pub resolution: u32,
    pub grid_samples: usize,
    pub random_samples: usize,
    pub sup_error: Extremum,
    pub min_norm: Extremum,
    pub partition_deviation: f64,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Points of E on the lattice of spacing `h / resolution`, each once, in
/// lexicographic lattice order.
pub fn e_grid_samples(domain: &DomainE, resolution: u32) -> Vec<Point> {
    let n = domain.n();
    let r = resolution.max(1) as i64;
    let mut keys: Vec<[i64; 3]> = Vec::new();
    let mut push_face = |f: &GridFace| {
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for d in 0..n {
            lo[d] = f.anchor[d] * r;
            hi[d] = lo[d] + if f.mask & (1 << d) != 0 { r } else { 0 };
        }
        crate::triangulate::for_each_in_box(n, lo, hi, |k| keys.push(k));
    };
    for c in domain.cells() {
        push_face(&GridFace {
            anchor: *c,
            mask: (1 << n) - 1,
        });
    }
    for f in domain.lower_faces() {
        push_face(f);
    }
    keys.sort_unstable();
    keys.dedup();
    let g = domain.grid();
    let step = g.spacing / r as f64;
    keys.iter()
        .map(|k| {
            let mut p = g.origin_point();
            for d in 0..n {
                p[d] += k[d] as f64 * step;
            }
            p
        })
        .collect()
}

pub fn e_random_samples(domain: &DomainE, rng: &mut ChaCha8Rng, count: usize) -> Vec<Point> {
    (0..count).map(|_| domain.sample_point(rng)).collect()
}

/// Random points of the topological boundary of E: on boundary facets of
/// the full cells and on lower faces.
pub fn boundary_samples(domain: &DomainE, rng: &mut ChaCha8Rng, count: usize) -> Vec<Point> {
    let mut faces = domain.boundary_facets();
    faces.extend_from_slice(domain.lower_faces());
    if faces.is_empty() {
        return Vec::new();
    }
    let g = domain.grid();
    (0..count)
        .map(|_| {
            let f = faces[rng.random_range(0..faces.len())];
            let (lo, hi) = f.bounds(g);
            let mut p = lo;
            for d in 0..g.n {
                if hi[d] > lo[d] {
                    p[d] = rng.random_range(lo[d]..=hi[d]);
                }
            }
            p
        })
        .collect()
}

/// max |f(z) - F(z)| over the samples.
pub fn oracle_sup_error(
    f: &FieldSpec,
    big_f: impl Fn(&Point) -> Option<Vector>,
    samples: &[Point],
) -> Extremum {
    let mut worst = Extremum {
        value: 0.0,
        at: None,
    };
    for z in samples {
        let e = match (f.eval(z), big_f(z)) {
            (Ok(a), Some(b)) => (a - b).norm(),
            _ => f64::INFINITY,
        };
        if e > worst.value || (e == f64::INFINITY && worst.at.is_none()) {
            worst = Extremum {
                value: e,
                at: Some(*z),
            };
        }
    }
    worst
}

/// min |map(z)| over the samples; unevaluable points count as zero.
pub fn oracle_zero_scan(map: impl Fn(&Point) -> Option<Vector>, samples: &[Point]) -> Extremum {
    let mut best = Extremum {
        value: f64::INFINITY,
        at: None,
    };
    for z in samples {
        let v = map(z).map_or(0.0, |v| v.norm());
        if v < best.value {
            best = Extremum {
                value: v,
                at: Some(*z),
            };
        }
    }
    best
}

/// Samples every lower maximal simplex of K̂ on the barycentric lattice with
/// denominator `resolution` and returns the smallest |value + c| seen, with
/// the simplex attaining it.
pub fn brute_force_avoidance_check(
    g: &ApproximantG,
    c: &Vector,
    resolution: u32,
) -> (f64, Option<u32>) {
    let n = g.n();
    let k = n - 1;
    let m = resolution.max(1) as i64;
    let mut best = (f64::INFINITY, None);
    for &i in &g.lower_maximal {
        let ids = g.complex().simplex(k, i as usize);
        let vals: SmallVec<[Vector; 4]> = ids.iter().map(|&v| g.values[v as usize] + *c).collect();
        let mut hi = [0i64; 3];
        for x in hi[..k.max(1)].iter_mut() {
            *x = m;
        }
        crate::triangulate::for_each_in_box(k.max(1), [0; 3], hi, |a| {
            let used: i64 = a[..k].iter().sum();
            if used > m {
                return;
            }
            let mut v = vals[0] * ((m - used) as f64 / m as f64);
            for j in 0..k {
                v += vals[j + 1] * (a[j] as f64 / m as f64);
            }
            let norm = v.norm();
            if norm < best.0 {
                best = (norm, Some(i));
            }
        });
    }
    best
}

/// Worst |1 - Σφ| over the samples.
pub fn partition_sum_check(pu: &PartitionOfUnity<'_>, samples: &[Point]) -> f64 {
    samples
        .iter()
        .map(|x| pu.eval(x).map_or(f64::INFINITY, |p| (1.0 - p.sum()).abs()))
        .fold(0.0, f64::max)
}

/// Random points inside Keep simplices.
pub fn q_samples(ct: &ClassifiedTriangulation, rng: &mut ChaCha8Rng, count: usize) -> Vec<Point> {
    let keep: Vec<usize> = (0..ct.labels.len())
        .filter(|&i| ct.labels[i].is_keep())
        .collect();
    if keep.is_empty() {
        return Vec::new();
    }
    let n = ct.tri.n();
    (0..count)
        .map(|_| {
            let i = keep[rng.random_range(0..keep.len())];
            let pts = ct.tri.complex.positions(ct.tri.top_simplex(i));
            let mut w: SmallVec<[f64; 4]> =
                (0..=n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = w.iter().sum();
            for x in w.iter_mut() {
                *x /= total;
            }
            Point::combination(&pts, &w)
        })
        .collect()
}

/// Evaluates F = ĥ ∘ h with its own point location and ray intersection.
pub struct IndependentEvaluator<'a> {
    ct: &'a ClassifiedTriangulation,
    zf: &'a ZeroFreeMap,
    locator: PointLocator,
}

impl<'a> IndependentEvaluator<'a> {
    pub fn new(ct: &'a ClassifiedTriangulation, zf: &'a ZeroFreeMap) -> Self {
        Self {
            ct,
            zf,
            locator: PointLocator::new(&ct.tri.complex),
        }
    }

    pub fn eval(&self, z: &Point) -> Option<Vector> {
        let c = &self.ct.tri.complex;
        let loc = self.locator.locate(c, z)?;
        let i = loc.simplex.index as usize;
        let ids = c.simplex(c.dim(), i);
        match &self.ct.labels[i] {
            Label::Keep => self.zf.map.eval_in_k_simplex(ids, loc.bary.as_slice()),
            Label::Discard(w) => {
                let (facet, p) = ray_exit(&c.positions(ids), w, z)?;
                let f: SmallVec<[VertexId; 4]> = ids
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != facet)
                    .map(|(_, &v)| v)
                    .collect();
                let fpts = c.positions(&f);
                let b = barycentric(&fpts, &p).ok()?;
                let clamped: SmallVec<[f64; 4]> = b.0.iter().map(|x| x.max(0.0)).collect();
                self.zf.map.eval_in_k_simplex(&f, &clamped)
            }
            Label::Bad(_) => None,
        }
    }
}

/// Where the ray from `w` (interior) through `z` leaves the simplex: the
/// facet (by opposite vertex) and the exit point. Uses facet normals.
fn ray_exit(verts: &[Point], w: &Point, z: &Point) -> Option<(usize, Point)> {
    let n = w.dim();
    let d = *z - *w;
    let mut best: Option<(f64, usize)> = None;
    for j in 0..=n {
        let f: SmallVec<[Point; 3]> = verts
            .iter()
            .enumerate()
            .filter(|&(q, _)| q != j)
            .map(|(_, p)| *p)
            .collect();
        let normal = facet_normal(&f);
        let denom = normal.dot(&d);
        if denom == 0.0 {
            continue;
        }
        let t = normal.dot(&(f[0] - *w)) / denom;
        if t > 0.0 && best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, j));
        }
    }
    let (t, j) = best?;
    Some((j, *w + d * t))
}

fn facet_normal(f: &[Point]) -> Vector {
    match f.len() {
        2 => {
            let e = f[1] - f[0];
            Point::xy(-e[1], e[0])
        }
        3 => {
            let a = f[1] - f[0];
            let b = f[2] - f[0];
            Point::xyz(
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            )
        }
        _ => unreachable!("facets of 2- and 3-simplices only"),
    }
}

/// Seeded generator for a verification stage.
pub fn stage_rng(seed: u64, stage: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng
}
