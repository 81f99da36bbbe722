//! Zero-free PL maps: exact minimum-norm certificates on simplices, the
//! avoidance constant for the lower skeleton, and the assembled map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::approximate::{retract_h, ApproxError, ApproximantG};
use crate::domain::DomainE;
use crate::simplicial::{min_norm_hull, Point, Vector};
use crate::triangulate::ClassifiedTriangulation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZeroFreeError {
    #[error("the clamp map is undefined at the zero vector")]
    ClampAtZero,
    #[error(
        "minimum norm {m_a:e} on the Keep region is not certified positive (simplex {simplex})"
    )]
    KeepRegionNotZeroFree { m_a: f64, simplex: usize },
    #[error("no avoiding constant found in {draws} draws")]
    DrawsExhausted { draws: usize },
    #[error("final certificate failed: minimum norm {mu:e} at simplex ({dim}, {index})")]
    CertificateFailed { mu: f64, dim: usize, index: usize },
    #[error(transparent)]
    Approx(#[from] ApproxError),
}

/// Radial projection onto the sphere of radius ρ for |x| < ρ; identity
/// elsewhere.
pub fn clamp_r(x: &Vector, rho: f64) -> Result<Vector, ZeroFreeError> {
    let norm = x.norm();
    if norm == 0.0 {
        return Err(ZeroFreeError::ClampAtZero);
    }
    Ok(if norm >= rho { *x } else { *x * (rho / norm) })
}

/// Distance from the origin to the convex hull of the values: the minimum of
/// |A| over a simplex for the affine map A with these vertex values.
pub fn certified_min_norm(values: &[Vector]) -> f64 {
    min_norm_hull(values)
}

/// Certified margins at or below this threshold are treated as zero:
/// `1e-10 (1 + max |value|)`.
pub fn certificate_threshold(values: &[Vector]) -> f64 {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    1e-10 * (1.0 + scale)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AvoidanceOptions {
    /// Upper bound on |c| (besides m_A).
    pub budget: f64,
    pub seed: u64,
    pub max_draws: usize,
    /// Rejections after which the sampling radius is halved.
    pub halve_every: usize,
}

impl AvoidanceOptions {
    pub fn new(budget: f64, seed: u64) -> Self {
        Self {
            budget,
            seed,
            max_draws: 1000,
            halve_every: 50,
        }
    }
}

/// A constant c with 0 outside every shifted lower-skeleton image.
#[derive(Clone, Debug, PartialEq)]
pub struct AvoidanceConstant {
    pub c: Vector,
    /// Minimum norm over the n-simplices of K̂ (infinite when there are none).
    pub m_a: f64,
    /// Radius of the ball c was drawn from.
    pub radius: f64,
    pub draws: usize,
    pub threshold: f64,
    /// min |values + c| over each lower maximal simplex, in order.
    pub lower_margins: Vec<f64>,
}

fn simplex_values(g: &ApproximantG, dim: usize, i: usize, shift: &Vector) -> SmallVec<[Vector; 4]> {
    g.complex()
        .simplex(dim, i)
        .iter()
        .map(|&v| g.values[v as usize] + *shift)
        .collect()
}

fn random_in_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vector {
    loop {
        let mut v = Point::zero(n);
        for d in 0..n {
            v[d] = rng.random_range(-1.0..1.0);
        }
        let r = v.norm();
        if r < 1.0 && r > 0.0 {
            return v * radius;
        }
    }
}

/// Draws c uniformly from the ball of radius `min(m_A, budget) / 2` (halved
/// after every `halve_every` rejections) until 0 avoids the hull of every
/// shifted lower maximal simplex of K̂.
pub fn choose_avoidance_constant(
    g: &ApproximantG,
    opts: &AvoidanceOptions,
) -> Result<AvoidanceConstant, ZeroFreeError> {
    let n = g.n();
    let zero = Vector::zero(n);
    let threshold = certificate_threshold(&g.values);
    let mut m_a = f64::INFINITY;
    for i in 0..g.a_count() {
        let m = certified_min_norm(&simplex_values(g, n, i, &zero));
        if m <= threshold {
            return Err(ZeroFreeError::KeepRegionNotZeroFree { m_a: m, simplex: i });
        }
        m_a = m_a.min(m);
    }
    let mut radius = m_a.min(opts.budget) / 2.0;
    if g.lower_maximal.is_empty() {
        return Ok(AvoidanceConstant {
            c: zero,
            m_a,
            radius,
            draws: 0,
            threshold,
            lower_margins: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut margins = Vec::with_capacity(g.lower_maximal.len());
    for draw in 1..=opts.max_draws {
        let c = random_in_ball(&mut rng, n, radius);
        margins.clear();
        let mut ok = true;
        for &i in &g.lower_maximal {
            let m = certified_min_norm(&simplex_values(g, n - 1, i as usize, &c));
            if m <= threshold {
                ok = false;
                break;
            }
            margins.push(m);
        }
        if ok {
            return Ok(AvoidanceConstant {
                c,
                m_a,
                radius,
                draws: draw,
                threshold,
                lower_margins: margins,
            });
        }
        if draw % opts.halve_every == 0 {
            radius *= 0.5;
        }
    }
    Err(ZeroFreeError::DrawsExhausted {
        draws: opts.max_draws,
    })
}

/// The PL map ĥ = ĝ + c on K̂ with its certificate.
#[derive(Clone, Debug)]
pub struct ZeroFreeMap {
    /// K̂ with the shifted vertex values.
    pub map: ApproximantG,
    pub c: Vector,
    pub m_a: f64,
    /// Certified minimum of |ĥ| over |K̂|.
    pub mu: f64,
    pub threshold: f64,
    /// Certified min |ĥ| on every maximal simplex of K̂, in
    /// `maximal_simplices` order.
    pub margins: Vec<f64>,
}

/// Shifts the vertex values by c and certifies every maximal simplex.
pub fn assemble_zero_free(
    mut g: ApproximantG,
    avoid: &AvoidanceConstant,
) -> Result<ZeroFreeMap, ZeroFreeError> {
    for v in g.values.iter_mut() {
        *v += avoid.c;
    }
    let n = g.n();
    let zero = Vector::zero(n);
    let threshold = certificate_threshold(&g.values);
    let mut mu = f64::INFINITY;
    let mut margins = Vec::new();
    let maximal: Vec<(usize, usize)> = g.maximal_simplices().collect();
    for (dim, i) in maximal {
        let m = certified_min_norm(&simplex_values(&g, dim, i, &zero));
        if m <= threshold {
            return Err(ZeroFreeError::CertificateFailed {
                mu: m,
                dim,
                index: i,
            });
        }
        mu = mu.min(m);
        margins.push(m);
    }
    Ok(ZeroFreeMap {
        map: g,
        c: avoid.c,
        m_a: avoid.m_a,
        mu,
        threshold,
        margins,
    })
}

/// F(z) = ĥ(h(z)) for z in E.
pub fn eval_final(
    zf: &ZeroFreeMap,
    ct: &ClassifiedTriangulation,
    domain: &DomainE,
    z: &Point,
) -> Result<Vector, ZeroFreeError> {
    let r = retract_h(ct, domain, z)?;
    zf.map
        .eval_retracted(ct, &r)
        .ok_or(ZeroFreeError::Approx(ApproxError::Locate(r.point)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::{subdivide_uniform, Simplex, SimplicialComplex};
    use proptest::prelude::*;

    #[test]
    fn clamp_examples() {
        assert_eq!(
            clamp_r(&Point::xy(0.5, 0.0), 1.0).unwrap(),
            Point::xy(1.0, 0.0)
        );
        assert_eq!(
            clamp_r(&Point::xy(3.0, 4.0), 1.0).unwrap(),
            Point::xy(3.0, 4.0)
        );
        assert_eq!(
            clamp_r(&Point::xy(0.0, 0.0), 1.0),
            Err(ZeroFreeError::ClampAtZero)
        );
    }

    #[test]
    fn min_norm_examples() {
        let m = certified_min_norm(&[Point::xy(1.0, 0.0), Point::xy(0.0, 1.0)]);
        assert!((m - 0.5f64.sqrt()).abs() < 1e-15);
        let m = certified_min_norm(&[Point::xy(1.0, 1.0), Point::xy(2.0, 1.0)]);
        assert!((m - 2f64.sqrt()).abs() < 1e-15);
        let m = certified_min_norm(&[
            Point::xy(1.0, 0.0),
            Point::xy(-1.0, 1.0),
            Point::xy(-1.0, -1.0),
        ]);
        assert_eq!(m, 0.0);
    }

    /// Edge complex in R^2 with the given vertex values.
    fn edge_map(values: [Vector; 2]) -> ApproximantG {
        let c = SimplicialComplex::from_maximal(
            2,
            vec![Point::xy(0.0, 0.0), Point::xy(1.0, 0.0)],
            [Simplex::new(&[0, 1])],
        )
        .unwrap();
        ApproximantG {
            sub: subdivide_uniform(&c, 0).unwrap(),
            values: values.to_vec(),
            levels: 0,
            snap_error: 0.0,
            lower_maximal: vec![0],
        }
    }

    #[test]
    fn avoidance_on_a_segment_through_zero() {
        let g = edge_map([Point::xy(1.0, 0.0), Point::xy(-1.0, 0.0)]);
        let a = choose_avoidance_constant(&g, &AvoidanceOptions::new(0.1, 1)).unwrap();
        assert!(a.c[1] != 0.0);
        assert!(a.c.norm() < 0.05);
        assert!(a.m_a.is_infinite());
        let zf = assemble_zero_free(g, &a).unwrap();
        // Oracle: the shifted segment lies on the line y = c_y.
        assert!((zf.mu - a.c[1].abs()).abs() < 1e-12);
        let again = choose_avoidance_constant(
            &edge_map([Point::xy(1.0, 0.0), Point::xy(-1.0, 0.0)]),
            &AvoidanceOptions::new(0.1, 1),
        )
        .unwrap();
        assert_eq!(again.c, a.c);
    }

    #[test]
    fn translation_bound() {
        let g = edge_map([Point::xy(1.0, 1.0), Point::xy(2.0, 2.0)]);
        let mu0 = certified_min_norm(&g.values);
        let a = choose_avoidance_constant(&g, &AvoidanceOptions::new(0.1, 9)).unwrap();
        let zf = assemble_zero_free(g, &a).unwrap();
        assert!(zf.mu >= mu0 - a.c.norm() - 1e-15);
        assert!(zf.mu <= mu0 + a.c.norm() + 1e-15);
    }

    #[test]
    fn empty_lower_skeleton_gives_zero_constant() {
        let mut g = edge_map([Point::xy(1.0, 1.0), Point::xy(2.0, 2.0)]);
        g.lower_maximal.clear();
        let a = choose_avoidance_constant(&g, &AvoidanceOptions::new(0.1, 9)).unwrap();
        assert_eq!(a.c, Point::xy(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn clamp_properties(x in -3.0f64..3.0, y in -3.0f64..3.0, rho in 0.01f64..2.0) {
            let v = Point::xy(x, y);
            prop_assume!(v.norm() > 0.0);
            let r = clamp_r(&v, rho).unwrap();
            prop_assert!(r.norm() >= rho * (1.0 - 1e-15));
            prop_assert!((r - v).norm() <= rho);
            prop_assert_eq!(r == v, v.norm() >= rho);
        }
    }
}
