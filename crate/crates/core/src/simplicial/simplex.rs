use smallvec::SmallVec;

use super::linalg::{self, Mat4};
use super::{GeometryError, Point, BARY_RECON_TOL, INTERIOR_TOL, RANK_REL_TOL};

/// Index of a vertex in a complex's vertex list.
pub type VertexId = u32;

/// A simplex given by the ids of its k+1 vertices.
///
/// The order of the vertices is significant for oriented operations; faces
/// keep the relative order of their parent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: SmallVec<[VertexId; 4]>,
}

impl Simplex {
    pub fn new(vertices: &[VertexId]) -> Self {
        debug_assert!(!vertices.is_empty() && vertices.len() <= 4);
        Self {
            vertices: SmallVec::from_slice(vertices),
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Copy with ascending vertex ids; the canonical form used for lookups.
    pub fn sorted(&self) -> Self {
        let mut v = self.vertices.clone();
        v.sort_unstable();
        Self { vertices: v }
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    /// The face spanned by the vertices selected by `mask` (bit i selects vertex i).
    pub fn face(&self, mask: u32) -> Simplex {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &v)| v)
            .collect();
        Simplex { vertices }
    }
}

/// A face together with whether it is a proper face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub simplex: Simplex,
    pub proper: bool,
}

/// All nonempty faces of `s`, ordered by the bitmask of selected vertices.
pub fn faces_of(s: &Simplex) -> Vec<Face> {
    let k1 = s.vertices.len() as u32;
    let full = (1u32 << k1) - 1;
    (1..=full)
        .map(|mask| Face {
            simplex: s.face(mask),
            proper: mask != full,
        })
        .collect()
}

/// Barycentric coordinates of a point with respect to a simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricCoords(pub SmallVec<[f64; 4]>);

impl BarycentricCoords {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_inside(&self) -> bool {
        self.0.iter().all(|&l| l >= 0.0)
    }
}

/// Where a point sits relative to a simplex.
#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    Outside,
    Interior,
    /// The minimal face containing the point, as positions into the simplex's
    /// vertex list.
    OnBoundary(Simplex),
}

/// Whether the points are affinely (geometrically) independent.
///
/// Decided by the rank of the matrix of differences `p_i - p_0`, with entries
/// below `1e-10` times the largest entry treated as zero.
pub fn geometric_independence(points: &[Point]) -> Result<bool, GeometryError> {
    let first = points.first().ok_or(GeometryError::Empty)?;
    let n = first.dim();
    if let Some(p) = points.iter().find(|p| p.dim() != n) {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    if points.len() > n + 1 {
        return Ok(false);
    }
    let rows = points.len() - 1;
    if rows == 0 {
        return Ok(true);
    }
    let mut m: Mat4 = [[0.0; 4]; 4];
    for (r, p) in points[1..].iter().enumerate() {
        let d = *p - *first;
        m[r][..n].copy_from_slice(d.coords());
    }
    Ok(linalg::rank(m, rows, n, RANK_REL_TOL) == rows)
}

/// Barycentric coordinates of `p` in the simplex spanned by `verts`.
///
/// For simplices of lower dimension than the ambient space, `p` must lie on
/// the affine hull (reconstruction error at most `1e-9`).
pub fn barycentric(verts: &[Point], p: &Point) -> Result<BarycentricCoords, GeometryError> {
    let k = verts.len() - 1;
    let n = p.dim();
    let v0 = verts[0];
    let rhs_vec = *p - v0;
    let mut lambdas: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, k + 1);
    if k == 0 {
        if rhs_vec.norm() > BARY_RECON_TOL * (1.0 + v0.norm_inf()) {
            return Err(GeometryError::OutsideAffineHull);
        }
        lambdas[0] = 1.0;
        return Ok(BarycentricCoords(lambdas));
    }
    let mut d = [Point::zero(n); 3];
    for i in 0..k {
        d[i] = verts[i + 1] - v0;
    }
    let alpha = if k == n {
        let mut m: Mat4 = [[0.0; 4]; 4];
        let mut rhs = [0.0; 4];
        for r in 0..n {
            for c in 0..k {
                m[r][c] = d[c][r];
            }
            rhs[r] = rhs_vec[r];
        }
        linalg::solve(m, rhs, n, 1e-14).ok_or(GeometryError::Degenerate)?
    } else {
        // Least squares via the Gram system, then check the residual.
        let mut m: Mat4 = [[0.0; 4]; 4];
        let mut rhs = [0.0; 4];
        for r in 0..k {
            for c in 0..k {
                m[r][c] = d[r].dot(&d[c]);
            }
            rhs[r] = d[r].dot(&rhs_vec);
        }
        let alpha = linalg::solve(m, rhs, k, 1e-14).ok_or(GeometryError::Degenerate)?;
        let mut recon = v0;
        for i in 0..k {
            recon += d[i] * alpha[i];
        }
        let scale = 1.0 + verts.iter().fold(0.0f64, |a, v| a.max(v.norm_inf()));
        if recon.distance(p) > BARY_RECON_TOL * scale {
            return Err(GeometryError::OutsideAffineHull);
        }
        alpha
    };
    let mut sum = 0.0;
    for i in 0..k {
        lambdas[i + 1] = alpha[i];
        sum += alpha[i];
    }
    lambdas[0] = 1.0 - sum;
    Ok(BarycentricCoords(lambdas))
}

/// Classifies `p` against the simplex spanned by `verts`: interior iff every
/// coordinate exceeds `1e-12`; on the boundary otherwise unless some
/// coordinate is below `-1e-12`.
pub fn locate_in_simplex(verts: &[Point], p: &Point) -> Result<Location, GeometryError> {
    let bary = match barycentric(verts, p) {
        Ok(b) => b,
        Err(GeometryError::OutsideAffineHull) => return Ok(Location::Outside),
        Err(e) => return Err(e),
    };
    Ok(classify_bary(&bary))
}

pub(crate) fn classify_bary(bary: &BarycentricCoords) -> Location {
    if bary.0.iter().any(|&l| l < -INTERIOR_TOL) {
        return Location::Outside;
    }
    if bary.0.iter().all(|&l| l > INTERIOR_TOL) {
        return Location::Interior;
    }
    let positions: SmallVec<[VertexId; 4]> = bary
        .0
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > INTERIOR_TOL)
        .map(|(i, _)| i as VertexId)
        .collect();
    Location::OnBoundary(Simplex::new(&positions))
}

/// Signed n-volume times n! of a full-dimensional simplex.
pub fn orientation(verts: &[Point]) -> f64 {
    let n = verts[0].dim();
    debug_assert_eq!(verts.len(), n + 1);
    let mut m: Mat4 = [[0.0; 4]; 4];
    for (r, v) in verts[1..].iter().enumerate() {
        let d = *v - verts[0];
        m[r][..n].copy_from_slice(d.coords());
    }
    linalg::det(&m, n)
}

/// Unsigned k-volume of a k-simplex embedded in R^n, via the Gram determinant.
pub fn volume(verts: &[Point]) -> f64 {
    let k = verts.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let mut m: Mat4 = [[0.0; 4]; 4];
    for r in 0..k {
        for c in 0..k {
            m[r][c] = (verts[r + 1] - verts[0]).dot(&(verts[c + 1] - verts[0]));
        }
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    linalg::det(&m, k).max(0.0).sqrt() / factorial
}
