use smallvec::SmallVec;

use super::ApproxError;
use crate::domain::DomainE;
use crate::simplicial::{barycentric, Point};
use crate::triangulate::{ClassifiedTriangulation, Label};

/// Coordinates at or below this count as lying on a facet.
const FACE_TOL: f64 = 1e-12;

/// Image of a point under the retraction onto |K|.
#[derive(Clone, Debug, PartialEq)]
pub struct Retracted {
    pub point: Point,
    /// Top simplex of L containing both the input and the image.
    pub simplex: u32,
    /// Barycentric coordinates of `point` in that simplex.
    pub bary: SmallVec<[f64; 4]>,
    /// For a Discard simplex, the position of the vertex opposite the facet
    /// holding `point` (its coordinate is exactly 0).
    pub facet: Option<usize>,
}

/// Locates `p` in L: the candidate simplex of the nearby cells in which `p`
/// is most interior.
pub(crate) fn locate_in_l(
    ct: &ClassifiedTriangulation,
    p: &Point,
) -> Option<(u32, SmallVec<[f64; 4]>)> {
    let tri = &ct.tri;
    let mut best: Option<(f64, u32, SmallVec<[f64; 4]>)> = None;
    for i in tri.candidates_near(p, 1) {
        let pts = tri.complex.positions(tri.top_simplex(i as usize));
        let Ok(b) = barycentric(&pts, p) else {
            continue;
        };
        let m = b.min();
        if m >= -1e-10 && best.as_ref().is_none_or(|(bm, _, _)| m > *bm) {
            best = Some((m, i, b.0));
        }
    }
    best.map(|(_, i, b)| (i, b))
}

/// The retraction h: identity on |K|; inside a Discard simplex σ, radial
/// projection from its witness z_σ onto ∂σ.
pub fn retract_h(
    ct: &ClassifiedTriangulation,
    domain: &DomainE,
    z: &Point,
) -> Result<Retracted, ApproxError> {
    if !domain.point_in_e(z) {
        return Err(ApproxError::NotInE(*z));
    }
    retract_in_l(ct, z)
}

/// The radial retraction on all of |L| minus the witnesses; [`retract_h`]
/// restricted to E.
pub fn retract_in_l(ct: &ClassifiedTriangulation, z: &Point) -> Result<Retracted, ApproxError> {
    let (i, lam) = locate_in_l(ct, z).ok_or(ApproxError::Locate(*z))?;
    let tri = &ct.tri;
    let witness = match &ct.labels[i as usize] {
        Label::Keep => {
            return Ok(Retracted {
                point: *z,
                simplex: i,
                bary: lam,
                facet: None,
            })
        }
        Label::Discard(w) => *w,
        Label::Bad(_) => return Err(ApproxError::BadSimplex(i as usize)),
    };
    let pts = tri.complex.positions(tri.top_simplex(i as usize));
    let (jmin, &mmin) = lam
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let mut bary = lam.clone();
    let facet = if mmin <= FACE_TOL {
        jmin
    } else {
        let w = barycentric(&pts, &witness)?.0;
        if z.distance(&witness) == 0.0 {
            return Err(ApproxError::NotInE(*z));
        }
        // Ray z_σ + t (z - z_σ), t >= 1: the first coordinate to reach 0.
        let mut t_star = f64::INFINITY;
        let mut arg = 0;
        for j in 0..lam.len() {
            if lam[j] < w[j] {
                let t = w[j] / (w[j] - lam[j]);
                if t < t_star {
                    t_star = t;
                    arg = j;
                }
            }
        }
        debug_assert!(t_star.is_finite() && t_star >= 1.0 - 1e-9);
        for j in 0..lam.len() {
            bary[j] = w[j] + t_star * (lam[j] - w[j]);
        }
        arg
    };
    bary[facet] = 0.0;
    for b in bary.iter_mut() {
        *b = b.max(0.0);
    }
    let total: f64 = bary.iter().sum();
    for b in bary.iter_mut() {
        *b /= total;
    }
    let point = Point::combination(&pts, &bary);
    Ok(Retracted {
        point,
        simplex: i,
        bary,
        facet: Some(facet),
    })
}
