//! Distance from the origin to the convex hull of at most four points.
//!
//! The nearest point of a polytope lies in the relative interior of some face
//! spanned by an affinely independent subset of the points, and there it is
//! the orthogonal projection onto that subset's affine hull. Enumerating all
//! subsets (at most 15) and keeping the projections with nonnegative weights
//! therefore yields the exact minimum.

use super::linalg::{self, Mat4};
use super::Point;

const WEIGHT_TOL: f64 = 1e-13;
const GRAM_REL_TOL: f64 = 1e-13;

/// Nearest point of `conv(points)` to the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HullProjection {
    pub distance: f64,
    /// Convex weights of the nearest point (first `points.len()` entries used).
    pub weights: [f64; 4],
}

/// Euclidean distance from the origin to the convex hull of `points`.
/// Returns exactly `0.0` when the origin lies in a full-dimensional face.
pub fn min_norm_hull(points: &[Point]) -> f64 {
    project_origin(points).distance
}

/// Euclidean distance from `p` to the simplex (or any point set's hull) `verts`.
pub fn distance_to_hull(verts: &[Point], p: &Point) -> f64 {
    let mut shifted = [Point::zero(p.dim()); 4];
    for (s, v) in shifted.iter_mut().zip(verts) {
        *s = *v - *p;
    }
    min_norm_hull(&shifted[..verts.len()])
}

pub fn project_origin(points: &[Point]) -> HullProjection {
    let m = points.len();
    assert!(
        (1..=4).contains(&m),
        "hull projection supports 1 to 4 points"
    );
    let n = points[0].dim();
    let mut best = HullProjection {
        distance: f64::INFINITY,
        weights: [0.0; 4],
    };
    let mut idx = [0usize; 4];
    for mask in 1u32..(1 << m) {
        let t = mask.count_ones() as usize;
        if t - 1 > n {
            continue;
        }
        let mut c = 0;
        for i in 0..m {
            if mask & (1 << i) != 0 {
                idx[c] = i;
                c += 1;
            }
        }
        let Some((weights, full)) = affine_projection_weights(points, &idx[..t], n) else {
            continue;
        };
        if weights[..t].iter().any(|&w| w < -WEIGHT_TOL) {
            continue;
        }
        let (distance, w) = if full {
            (0.0, weights)
        } else {
            let mut w = weights;
            let mut sum = 0.0;
            for x in w[..t].iter_mut() {
                *x = x.max(0.0);
                sum += *x;
            }
            let mut q = Point::zero(n);
            for j in 0..t {
                w[j] /= sum;
                q += points[idx[j]] * w[j];
            }
            (q.norm(), w)
        };
        if distance < best.distance {
            best.distance = distance;
            best.weights = [0.0; 4];
            for j in 0..t {
                best.weights[idx[j]] = w[j];
            }
            if distance == 0.0 {
                break;
            }
        }
    }
    best
}

/// Weights of the projection of the origin onto the affine hull of the
/// selected points; `None` if they are affinely dependent. The flag reports
/// whether the hull is the whole ambient space.
fn affine_projection_weights(
    points: &[Point],
    idx: &[usize],
    n: usize,
) -> Option<([f64; 4], bool)> {
    let t = idx.len();
    let mut w = [0.0; 4];
    if t == 1 {
        w[0] = 1.0;
        return Some((w, n == 0));
    }
    let base = points[idx[0]];
    let k = t - 1;
    let mut d = [Point::zero(n); 3];
    for j in 0..k {
        d[j] = points[idx[j + 1]] - base;
    }
    let alpha = if k == n {
        let mut a: Mat4 = [[0.0; 4]; 4];
        let mut rhs = [0.0; 4];
        for r in 0..n {
            for c in 0..k {
                a[r][c] = d[c][r];
            }
            rhs[r] = -base[r];
        }
        linalg::solve(a, rhs, n, GRAM_REL_TOL)?
    } else {
        let mut g: Mat4 = [[0.0; 4]; 4];
        let mut rhs = [0.0; 4];
        for r in 0..k {
            for c in 0..k {
                g[r][c] = d[r].dot(&d[c]);
            }
            rhs[r] = -d[r].dot(&base);
        }
        linalg::solve(g, rhs, k, GRAM_REL_TOL)?
    };
    let mut sum = 0.0;
    for j in 0..k {
        w[j + 1] = alpha[j];
        sum += alpha[j];
    }
    w[0] = 1.0 - sum;
    Some((w, k == n))
}
