use smallvec::SmallVec;

use super::{
    for_each_in_box, ClassifiedTriangulation, Cover, Label, TriangulateError, Triangulation,
};
use crate::domain::DomainE;
use crate::simplicial::{barycentric, orientation, Point, VertexId};

/// One accepted vertex move.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexPerturbation {
    pub vertex: VertexId,
    pub old: Point,
    pub new: Point,
    /// Sup-norm length of the move.
    pub r: f64,
    /// Top simplices incident to the vertex.
    pub affected: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepairReport {
    pub perturbations: Vec<VertexPerturbation>,
    pub halvings: usize,
    pub keep_before: usize,
    pub keep: usize,
    pub discard: usize,
    pub residual_bad: usize,
}

/// Witnesses must have barycentric coordinates above this.
const WITNESS_BARY: f64 = 1e-9;
/// Moves shrink by halving down to `s * 2^-HALVING_LIMIT`.
const HALVING_LIMIT: u32 = 20;

fn simplex_points(tri: &Triangulation, i: usize) -> SmallVec<[Point; 4]> {
    tri.complex.positions(tri.top_simplex(i))
}

fn is_witness(domain: &DomainE, verts: &[Point], p: &Point) -> bool {
    match barycentric(verts, p) {
        Ok(b) => b.min() > WITNESS_BARY && !domain.point_in_e(p),
        Err(_) => false,
    }
}

/// Barycenter, then interior points of the barycentric lattice with
/// denominators `n+2..=8`.
fn lattice_witness(domain: &DomainE, verts: &[Point]) -> Option<Point> {
    let n = verts.len() - 1;
    let bary = Point::combination(verts, &[1.0 / (n + 1) as f64; 4][..=n]);
    if is_witness(domain, verts, &bary) {
        return Some(bary);
    }
    for m in (n + 2)..=8 {
        let mut found = None;
        // Compositions a_0 + ... + a_n = m with every a_i >= 1.
        let mut a = [1usize; 4];
        let mut hi = [0i64; 3];
        for x in hi[..n].iter_mut() {
            *x = (m - n) as i64;
        }
        for_each_in_box(n.max(1), [1, 1, 1], hi, |c| {
            if found.is_some() {
                return;
            }
            let used: usize = c[..n].iter().map(|&x| x as usize).sum();
            if used >= m {
                return;
            }
            a[..n].copy_from_slice(
                &c[..n]
                    .iter()
                    .map(|&x| x as usize)
                    .collect::<SmallVec<[usize; 3]>>(),
            );
            a[n] = m - used;
            let w: SmallVec<[f64; 4]> = a[..=n].iter().map(|&x| x as f64 / m as f64).collect();
            let p = Point::combination(verts, &w);
            if is_witness(domain, verts, &p) {
                found = Some(p);
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Sup-normalized candidate directions for moving a boundary vertex off E:
/// the summed orthant signs of the incident lattice cells lying in unlisted
/// domain cells, then each such orthant diagonal on its own.
fn directions(tri: &Triangulation, domain: &DomainE, v: VertexId) -> SmallVec<[Point; 9]> {
    let n = tri.n();
    let node = tri.vertex_nodes[v as usize];
    let mut sum = Point::zero(n);
    let mut diagonals: SmallVec<[Point; 9]> = SmallVec::new();
    for bits in 0u32..(1 << n) {
        let mut cell = node;
        let mut sign = Point::zero(n);
        for d in 0..n {
            if bits & (1 << d) != 0 {
                sign[d] = 1.0;
            } else {
                cell[d] -= 1;
                sign[d] = -1.0;
            }
        }
        if !domain.is_full_cell(&tri.lattice.domain_cell(&cell)) {
            sum += sign;
            diagonals.push(sign);
        }
    }
    let mut out = SmallVec::new();
    if sum.norm_inf() > 0.0 {
        out.push(sum * (1.0 / sum.norm_inf()));
    }
    out.extend(diagonals);
    out
}

/// Moves every boundary vertex of a Bad simplex off E, in increasing id
/// order, then relabels the former Bad simplices as Discard with witnesses.
///
/// A move by `r` (starting at `s/4`, halved on failure) is accepted when the
/// new position is outside E, every incident top simplex stays positively
/// oriented and within the cover member assigned to it, and every incident
/// Discard simplex still has a witness.
pub fn repair_bad_simplices(
    mut ct: ClassifiedTriangulation,
    domain: &DomainE,
    cover: &Cover,
) -> Result<(ClassifiedTriangulation, RepairReport), TriangulateError> {
    let n = ct.tri.n();
    let s = ct.tri.lattice.spacing;
    let keep_before = ct.count(Label::is_keep);
    let mut targets: Vec<VertexId> = ct
        .labels
        .iter()
        .filter_map(|l| match l {
            Label::Bad(b) => Some(b.iter().copied()),
            _ => None,
        })
        .flatten()
        .collect();
    targets.sort_unstable();
    targets.dedup();

    let incidence = ct.tri.complex.incidence(n);
    let min_det = 1e-9 * s.powi(n as i32);
    let mut perturbations = Vec::with_capacity(targets.len());
    let mut halvings = 0;

    for &v in &targets {
        let node = ct.tri.vertex_nodes[v as usize];
        let mut lo = node;
        for x in lo[..n].iter_mut() {
            *x -= 1;
        }
        let mut interior = true;
        for_each_in_box(n, lo, node, |c| interior &= ct.tri.cell_slot(&c).is_some());
        if !interior {
            return Err(TriangulateError::Internal(format!(
                "boundary vertex {v} lies on the boundary of P"
            )));
        }
        let old = ct.tri.complex.vertex(v);
        let star: Vec<u32> = incidence.of(v).to_vec();
        let dirs = directions(&ct.tri, domain, v);
        if dirs.is_empty() {
            return Err(TriangulateError::Internal(format!(
                "vertex {v} has no exterior direction"
            )));
        }

        let mut accepted = None;
        let mut r = s / 4.0;
        'shrink: for _ in 0..=HALVING_LIMIT {
            for dir in &dirs {
                let new = old + *dir * r;
                if domain.point_in_e(&new) {
                    continue;
                }
                let ok = star.iter().all(|&i| {
                    let m = cover.members[cover.member_of_simplex(&ct.tri, i as usize)];
                    m.center.distance_inf(&new) < m.radius
                });
                if !ok {
                    continue;
                }
                ct.tri.complex.set_vertex(v, new);
                let mut ok = star
                    .iter()
                    .all(|&i| orientation(&simplex_points(&ct.tri, i as usize)) > min_det);
                let mut rewitness: SmallVec<[(u32, Point); 8]> = SmallVec::new();
                if ok {
                    for &i in &star {
                        if let Label::Discard(w) = &ct.labels[i as usize] {
                            let pts = simplex_points(&ct.tri, i as usize);
                            if is_witness(domain, &pts, w) {
                                continue;
                            }
                            match lattice_witness(domain, &pts) {
                                Some(p) => rewitness.push((i, p)),
                                None => {
                                    ok = false;
                                    break;
                                }
                            }
                        }
                    }
                }
                if ok {
                    for (i, p) in rewitness {
                        ct.labels[i as usize] = Label::Discard(p);
                    }
                    accepted = Some((new, r));
                    break 'shrink;
                }
                ct.tri.complex.set_vertex(v, old);
            }
            r *= 0.5;
            halvings += 1;
        }
        let (new, r) = accepted.ok_or(TriangulateError::HalvingFloor { vertex: v })?;
        perturbations.push(VertexPerturbation {
            vertex: v,
            old,
            new,
            r,
            affected: star,
        });
    }

    // Former Bad simplices: search toward each moved vertex for a point off E.
    for i in 0..ct.labels.len() {
        let Label::Bad(moved) = &ct.labels[i] else {
            continue;
        };
        let pts = simplex_points(&ct.tri, i);
        let ids = ct.tri.top_simplex(i);
        let b = Point::combination(&pts, &[1.0 / (n + 1) as f64; 4][..=n]);
        let mut witness = None;
        'search: for &mv in moved {
            let pos = ids
                .iter()
                .position(|&x| x == mv)
                .expect("bad vertex belongs to its simplex");
            let target = pts[pos];
            let mut step = 0.5;
            for _ in 0..40 {
                let p = b + (target - b) * (1.0 - step);
                if is_witness(domain, &pts, &p) {
                    witness = Some(p);
                    break 'search;
                }
                step *= 0.5;
            }
        }
        let witness = witness
            .or_else(|| lattice_witness(domain, &pts))
            .ok_or(TriangulateError::WitnessNotFound { simplex: i })?;
        ct.labels[i] = Label::Discard(witness);
    }

    let keep = ct.count(Label::is_keep);
    let discard = ct.labels.len() - keep;
    let report = RepairReport {
        perturbations,
        halvings,
        keep_before,
        keep,
        discard,
        residual_bad: ct.count(Label::is_bad),
    };
    Ok((ct, report))
}

#[cfg(test)]
mod tests {
    use super::super::tests::domain;
    use super::super::*;
    use crate::simplicial::{barycentric, orientation};

    fn pipeline(d: &DomainE, k: i64) -> (ClassifiedTriangulation, RepairReport) {
        let t = base_triangulation(d, k, u128::MAX).unwrap();
        let cover = build_cover(&t, d).unwrap();
        let ct = classify_simplices(t, d).unwrap();
        repair_bad_simplices(ct, d, &cover).unwrap()
    }

    fn check_invariants(d: &DomainE, ct: &ClassifiedTriangulation, rep: &RepairReport) {
        assert_eq!(rep.residual_bad, 0);
        assert_eq!(rep.keep, rep.keep_before);
        let s = ct.tri.lattice.spacing;
        for p in &rep.perturbations {
            assert!(p.old.distance_inf(&p.new) <= s / 4.0 + 1e-15);
            assert!(!d.point_in_e(&p.new));
        }
        for (i, l) in ct.labels.iter().enumerate() {
            let pts = ct.tri.complex.positions(ct.tri.top_simplex(i));
            assert!(orientation(&pts) > 0.0);
            match l {
                Label::Keep => assert!(pts.iter().all(|p| d.point_in_interior(p))),
                Label::Discard(w) => {
                    assert!(!d.point_in_e(w));
                    assert!(barycentric(&pts, w).unwrap().min() > 0.0);
                }
                Label::Bad(_) => unreachable!(),
            }
        }
    }

    #[test]
    fn single_cell_all_discard() {
        let d = domain(2, 1, &[[0, 0, 0]]);
        let (ct, rep) = pipeline(&d, 1);
        assert_eq!(rep.keep, 0);
        assert_eq!(rep.discard, 18);
        assert_eq!(rep.perturbations.len(), 4);
        check_invariants(&d, &ct, &rep);
        assert!(ct.tri.complex.validate().is_valid());
    }

    #[test]
    fn l_shape_and_checkerboard() {
        let d = domain(2, 3, &[[0, 0, 0], [1, 0, 0], [0, 1, 0]]);
        let (ct, rep) = pipeline(&d, 5);
        check_invariants(&d, &ct, &rep);
        assert!(ct.tri.complex.validate().is_valid());
        // Checkerboard corner: direction sum vanishes, diagonals are used.
        let d = domain(2, 2, &[[0, 0, 0], [1, 1, 0]]);
        let (ct, rep) = pipeline(&d, 5);
        check_invariants(&d, &ct, &rep);
        assert!(ct.tri.complex.validate().is_valid());
    }

    #[test]
    fn three_dimensional_block() {
        let d = domain(3, 2, &[[0, 0, 0], [1, 0, 0], [0, 1, 1]]);
        let (ct, rep) = pipeline(&d, 5);
        check_invariants(&d, &ct, &rep);
        assert!(rep.keep > 0);
    }
}
