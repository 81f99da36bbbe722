//! The subcomplex K of the repaired triangulation, the retraction of E onto
//! |K|, the partition of unity, the approximant g̃ and its PL snapshot on a
//! subdivision of K.

mod partition;
mod retract;
mod snap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use partition::{GTilde, PartitionOfUnity, PartitionValue};
pub use retract::{retract_h, retract_in_l, Retracted};
pub use snap::{pl_snap, ApproximantG, SnapOptions};

use crate::domain::EvalError;
use crate::simplicial::{simplex_key, GeometryError, Point, Simplex, SimplicialComplex, VertexId};
use crate::triangulate::{ClassifiedTriangulation, Label};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApproxError {
    #[error("simplex {0} is still labeled Bad")]
    BadSimplex(usize),
    #[error("Keep simplex {0} has a vertex outside the interior of E")]
    KeepNotInterior(usize),
    #[error("point {0:?} is not in E")]
    NotInE(Point),
    #[error("point {0:?} could not be located in the triangulation")]
    Locate(Point),
    #[error("partition of unity vanishes at {0:?}")]
    PartitionDegenerate(Point),
    #[error("field evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("snap error {error:e} still exceeds {budget:e} at the subdivision cap {levels}")]
    SnapCap {
        levels: u32,
        error: f64,
        budget: f64,
    },
    #[error("subdivision level {levels} needs about {simplices} top simplices, cap is {cap}")]
    SubdivisionCap {
        levels: u32,
        simplices: u128,
        cap: u128,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

const NONE: u32 = u32::MAX;

/// K: the Keep n-simplices of L, the facets of the Discard n-simplices, and
/// all their faces. Vertex ids are those of L (every vertex of L is in K).
#[derive(Clone, Debug)]
pub struct ComplexK {
    pub complex: SimplicialComplex,
    /// L index of each n-simplex of K, in K's order. Together these form Q.
    pub keep: Vec<u32>,
    keep_of_l: Vec<u32>,
}

impl ComplexK {
    pub fn n(&self) -> usize {
        self.complex.ambient_dim()
    }

    /// Index in K of the n-simplex coming from the Keep simplex `l` of L.
    pub fn keep_index(&self, l: usize) -> Option<usize> {
        let k = self.keep_of_l[l];
        (k != NONE).then_some(k as usize)
    }

    /// Whether Q (the union of Keep simplices) is empty, i.e. K has no
    /// n-simplices.
    pub fn q_is_empty(&self) -> bool {
        self.keep.is_empty()
    }
}

/// Builds K from a repaired triangulation and checks that Q lies in E°.
pub fn build_k(
    ct: &ClassifiedTriangulation,
    domain: &crate::domain::DomainE,
) -> Result<ComplexK, ApproxError> {
    let tri = &ct.tri;
    let n = tri.n();
    let mut keep = Vec::new();
    let mut keep_of_l = vec![NONE; ct.labels.len()];
    let mut facet_keys: Vec<u128> = Vec::new();
    for (i, label) in ct.labels.iter().enumerate() {
        let s = tri.top_simplex(i);
        match label {
            Label::Keep => {
                if s.iter()
                    .any(|&v| !domain.point_in_interior(&tri.complex.vertex(v)))
                {
                    return Err(ApproxError::KeepNotInterior(i));
                }
                keep_of_l[i] = keep.len() as u32;
                keep.push(i as u32);
            }
            Label::Discard(_) => {
                for skip in 0..=n {
                    let mut f: SmallVec<[VertexId; 4]> = s
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    f.sort_unstable();
                    facet_keys.push(simplex_key(&f));
                }
            }
            Label::Bad(_) => return Err(ApproxError::BadSimplex(i)),
        }
    }
    facet_keys.sort_unstable();
    facet_keys.dedup();
    let mut maximal: Vec<Simplex> = keep
        .iter()
        .map(|&i| Simplex::new(tri.top_simplex(i as usize)))
        .collect();
    maximal.extend(
        facet_keys
            .iter()
            .map(|&key| Simplex::new(&unpack(key, n - 1))),
    );
    let complex = SimplicialComplex::from_maximal(n, tri.complex.vertices().to_vec(), maximal)?;
    Ok(ComplexK {
        complex,
        keep,
        keep_of_l,
    })
}

fn unpack(key: u128, k: usize) -> SmallVec<[VertexId; 4]> {
    (0..=k).map(|i| (key >> (32 * (3 - i))) as u32).collect()
}

/// How the total error below ε is split between the construction steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub epsilon: f64,
    /// Budget for |f(z) - g̃(h(z))| on E.
    pub cover_budget: f64,
    /// Analytic bound on |f(z) - g̃(h(z))|: `L sqrt(n) (1.5 s + 3 s)`.
    pub cover_bound: f64,
    pub snap_budget: f64,
    /// Sampled, not certified.
    pub snap_error: f64,
    pub constant_budget: f64,
    pub constant_norm: f64,
    /// `cover_bound + snap_error + constant_norm`.
    pub total: f64,
}

impl BudgetLedger {
    pub fn new(epsilon: f64, lipschitz: f64, n: usize, s: f64) -> Self {
        let cover_bound = lipschitz * (n as f64).sqrt() * 4.5 * s;
        Self {
            epsilon,
            cover_budget: epsilon / 4.0,
            cover_bound,
            snap_budget: epsilon / 8.0,
            snap_error: 0.0,
            constant_budget: epsilon / 8.0,
            constant_norm: 0.0,
            total: cover_bound,
        }
    }

    pub fn record_snap(&mut self, e: f64) {
        self.snap_error = e;
        self.total = self.cover_bound + self.snap_error + self.constant_norm;
    }

    pub fn record_constant(&mut self, c: f64) {
        self.constant_norm = c;
        self.total = self.cover_bound + self.snap_error + self.constant_norm;
    }

    /// Every component within its budget and the total below ε.
    pub fn is_within(&self) -> bool {
        self.cover_bound < self.cover_budget
            && self.snap_error < self.snap_budget
            && self.constant_norm < self.constant_budget
            && self.total < self.epsilon
    }
}
