//! End-to-end acceptance suite. Runs every criterion in sequence (so the
//! timings are not disturbed by parallel tests), prints one PASS/FAIL line
//! per criterion and exits non-zero if any failed.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zerofree_core::approximate::{ApproximantG, PartitionOfUnity};
use zerofree_core::domain::{box_distance, DomainE, GridFace, GridSpec};
use zerofree_core::io::{check_document, read_json, DomainDoc, ResultDocument};
use zerofree_core::simplicial::{
    subdivide_uniform, validate_complex, Point, Simplex, SimplicialComplex, Vector,
};
use zerofree_core::triangulate::{
    base_triangulation, build_cover, classify_simplices, repair_bad_simplices,
    DEFAULT_MAX_SIMPLICES,
};
use zerofree_core::verify::{
    boundary_samples, brute_force_avoidance_check, e_random_samples, q_samples,
};
use zerofree_core::zerofree::{certificate_threshold, certified_min_norm, clamp_r};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// Runs `approx`, returning the document and the wall time.
fn run(
    dir: &Path,
    name: &str,
    domain: &DomainDoc,
    epsilon: f64,
    field: &zerofree_core::io::FieldDoc,
    extra: &[&str],
) -> Result<(ResultDocument, Duration), String> {
    let (d, f) = write_inputs(dir, name, domain, field);
    let out_path = dir.join(format!("{name}_result.json"));
    let t = Instant::now();
    let out = approx(&d, &f, epsilon, &out_path, extra);
    let elapsed = t.elapsed();
    let code = out.status.code();
    if code != Some(0) {
        return Err(format!(
            "exit {code:?}: {}",
            String::from_utf8_lossy(&out.stderr)
                .lines()
                .last()
                .unwrap_or("")
        ));
    }
    let doc = read_json(&out_path).map_err(|e| e.to_string())?;
    Ok((doc, elapsed))
}

/// Certificates recomputed from the stored values, plus the sampled error.
fn certified(doc: &ResultDocument) -> Result<(), String> {
    let report = check_document(doc);
    ensure(
        report.passed,
        format!("certificate recheck failed: {:?}", report.failures.first()),
    )?;
    ensure(doc.certificates.mu > 0.0, "mu is not positive")?;
    ensure(
        doc.oracle.sup_error.value < doc.epsilon(),
        format!(
            "sampled sup error {:e} >= epsilon",
            doc.oracle.sup_error.value
        ),
    )?;
    ensure(
        doc.oracle.resolution == 4,
        "verification grid is not 4x the domain grid",
    )?;
    let failed: Vec<&str> = doc
        .oracle
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    ensure(
        failed.is_empty(),
        format!("oracle checks failed: {failed:?}"),
    )
}

fn disk_end_to_end(dir: &Path, docs: &mut Vec<ResultDocument>) -> Outcome {
    let (doc, t) = run(dir, "disk", &disk(), 0.1, &disk_field(), &[])?;
    certified(&doc)?;
    ensure(t < Duration::from_secs(60), format!("took {}", secs(t)))?;
    let msg = format!(
        "mu = {:.3e}, sup error = {:.3e} < 0.1, {} simplices rechecked, {}",
        doc.certificates.mu,
        doc.oracle.sup_error.value,
        doc.certificates.margins.len(),
        secs(t)
    );
    docs.push(doc);
    Ok(msg)
}

fn curve_end_to_end(dir: &Path, docs: &mut Vec<ResultDocument>) -> Outcome {
    let (doc, t) = run(dir, "curve", &curve(), 0.1, &curve_field(), &[])?;
    certified(&doc)?;
    ensure(doc.complex.a_count() == 0, "curve run has n-simplices")?;
    ensure(
        doc.complex.b_count() > 0,
        "curve run has no lower simplices",
    )?;
    ensure(
        doc.certificates.m_a.is_none(),
        "m_A recorded without a Keep region",
    )?;
    ensure(doc.c.iter().any(|&x| x != 0.0), "constant is zero")?;
    ensure(t < Duration::from_secs(30), format!("took {}", secs(t)))?;
    let msg = format!(
        "A empty, {} lower simplices, |c| = {:.3e}, mu = {:.3e}, {}",
        doc.complex.b_count(),
        doc.ledger.constant_norm,
        doc.certificates.mu,
        secs(t)
    );
    docs.push(doc);
    Ok(msg)
}

fn precondition_rejected(dir: &Path) -> Outcome {
    let (d, f) = write_inputs(dir, "zero", &disk(), &identity_field());
    let out_path = dir.join("zero_result.json");
    let out = approx(&d, &f, 0.1, &out_path, &[]);
    ensure(
        out.status.code() == Some(2),
        format!("exit {:?}", out.status.code()),
    )?;
    ensure(!out_path.exists(), "a result document was written")?;
    Ok("exit 2, no result document".into())
}

/// Exact min of |x| over the cells: distance from the origin to each box.
fn min_norm_over_cells(doc: &DomainDoc) -> f64 {
    let origin = Point::zero(doc.n);
    doc.cells
        .iter()
        .map(|c| {
            let lo: Vec<f64> = (0..doc.n)
                .map(|d| doc.origin[d] + doc.spacing * c[d] as f64)
                .collect();
            let hi: Vec<f64> = lo.iter().map(|x| x + doc.spacing).collect();
            box_distance(
                &origin,
                &Point::new(&lo).unwrap(),
                &Point::new(&hi).unwrap(),
            )
        })
        .fold(f64::INFINITY, f64::min)
}

fn annulus_bound(dir: &Path, docs: &mut Vec<ResultDocument>) -> Outcome {
    let eps = 0.1;
    let domain = annulus();
    let (doc, t) = run(dir, "annulus", &domain, eps, &identity_field(), &[])?;
    certified(&doc)?;
    let min_f = min_norm_over_cells(&domain);
    let mu = doc.certificates.mu;
    ensure(
        mu >= min_f - eps,
        format!("mu = {mu:e} < min|f| - epsilon = {:e}", min_f - eps),
    )?;
    let msg = format!(
        "mu = {mu:.4} >= min|f| - epsilon = {:.4}, sup error = {:.3e}, {}",
        min_f - eps,
        doc.oracle.sup_error.value,
        secs(t)
    );
    docs.push(doc);
    Ok(msg)
}

/// Random raster on a `size x size` grid: a union of discs with some cells
/// flipped, plus a few isolated edges and vertices.
fn random_raster(rng: &mut ChaCha8Rng) -> DomainE {
    let size = rng.random_range(16..=64usize);
    let discs: Vec<(f64, f64, f64)> = (0..rng.random_range(2..=6))
        .map(|_| {
            let s = size as f64;
            (
                rng.random_range(0.0..s),
                rng.random_range(0.0..s),
                rng.random_range(2.0..s / 3.0),
            )
        })
        .collect();
    let mut cells = Vec::new();
    for i in 0..size as i64 {
        for j in 0..size as i64 {
            let (x, y) = (i as f64 + 0.5, j as f64 + 0.5);
            let inside = discs
                .iter()
                .any(|&(cx, cy, r)| (x - cx).powi(2) + (y - cy).powi(2) <= r * r);
            if inside != rng.random_bool(0.04) {
                cells.push([i, j, 0]);
            }
        }
    }
    let mut lower = Vec::new();
    for _ in 0..rng.random_range(0..8) {
        let axis = rng.random_range(0..2usize);
        let mut anchor = [
            rng.random_range(0..size as i64),
            rng.random_range(0..size as i64),
            0,
        ];
        let mask = if rng.random_bool(0.7) { 1u8 << axis } else { 0 };
        if mask == 0 {
            anchor[axis] += 1;
        }
        lower.push(GridFace { anchor, mask });
    }
    let grid = GridSpec {
        n: 2,
        origin: vec![-1.0, -1.0],
        spacing: 2.0 / size as f64,
        shape: vec![size, size],
    };
    DomainE::new(grid, cells, lower).expect("raster is valid")
}

fn repair_suite() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut bad_total, mut moved) = (0, 0);
    for trial in 0..20 {
        let domain = random_raster(&mut rng);
        let at = |m: String| format!("raster {trial}: {m}");
        let tri =
            base_triangulation(&domain, 1, DEFAULT_MAX_SIMPLICES).map_err(|e| at(e.to_string()))?;
        let cover = build_cover(&tri, &domain).map_err(|e| at(e.to_string()))?;
        let before = classify_simplices(tri, &domain).map_err(|e| at(e.to_string()))?;
        let keep_before: Vec<bool> = before.labels.iter().map(|l| l.is_keep()).collect();
        bad_total += before.labels.iter().filter(|l| l.is_bad()).count();
        let (ct, report) =
            repair_bad_simplices(before, &domain, &cover).map_err(|e| at(e.to_string()))?;
        moved += report.perturbations.len();
        ensure(
            report.residual_bad == 0,
            at(format!("{} Bad simplices remain", report.residual_bad)),
        )?;
        ensure(
            !ct.labels.iter().any(|l| l.is_bad()),
            at("Bad label after repair".into()),
        )?;
        ensure(
            keep_before
                .iter()
                .zip(&ct.labels)
                .all(|(&k, l)| !k || l.is_keep()),
            at("a Keep simplex lost its label".into()),
        )?;
        ensure(
            report.keep >= report.keep_before,
            at("Keep count decreased".into()),
        )?;
        let v = validate_complex(&ct.tri.complex);
        ensure(
            v.is_valid(),
            at(format!(
                "not a simplicial complex: {:?}",
                v.violations.first()
            )),
        )?;
        for i in 0..ct.tri.top_count() {
            let member = &cover.members[cover.member_of_simplex(&ct.tri, i)];
            let pts = ct.tri.complex.positions(ct.tri.top_simplex(i));
            ensure(
                pts.iter().all(|p| member.contains(p)),
                at(format!("simplex {i} leaves its cover member")),
            )?;
        }
        for (i, l) in ct.labels.iter().enumerate() {
            if let Some(w) = l.witness() {
                ensure(
                    !domain.point_in_e(&w),
                    at(format!("witness of simplex {i} lies in E")),
                )?;
            }
        }
    }
    let t = t.elapsed();
    ensure(t < Duration::from_secs(120), format!("took {}", secs(t)))?;
    Ok(format!(
        "20 rasters, {bad_total} Bad simplices repaired by {moved} vertex moves, {}",
        secs(t)
    ))
}

/// Minimum of |Σ λ_i v_i| by repeated barycentric grid search, each round
/// zooming in around the best point found; 10^5 evaluations in total.
fn brute_min_norm(vals: &[Vector]) -> f64 {
    const ROUNDS: usize = 25;
    const PER_ROUND: usize = 4000;
    let k = vals.len() - 1;
    let m = ((PER_ROUND as f64).powf(1.0 / k as f64).floor() as usize).max(2);
    let eval = |lam: &[f64]| {
        let mut w = vec![1.0 - lam.iter().sum::<f64>()];
        w.extend_from_slice(lam);
        Point::combination(vals, &w).norm()
    };
    let mut center = vec![1.0 / (k + 1) as f64; k];
    let mut half = 1.0;
    let mut best = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    for _ in 0..ROUNDS {
        let step = 2.0 * half / (m - 1) as f64;
        let mut round_best = (f64::INFINITY, center.clone());
        let mut idx = vec![0usize; k];
        'grid: loop {
            let lam: Vec<f64> = (0..k)
                .map(|d| (center[d] - half + step * idx[d] as f64).clamp(0.0, 1.0))
                .collect();
            if lam.iter().sum::<f64>() <= 1.0 {
                let v = eval(&lam);
                if v < round_best.0 {
                    round_best = (v, lam);
                }
            }
            for d in 0..k {
                idx[d] += 1;
                if idx[d] < m {
                    continue 'grid;
                }
                idx[d] = 0;
            }
            break;
        }
        best = best.min(round_best.0);
        center = round_best.1;
        half = 3.0 * step;
    }
    best
}

/// Rebuilds K̂ and ĝ (unshifted) from the document alone.
fn approximant_from_doc(doc: &ResultDocument) -> Result<ApproximantG, String> {
    let cx = &doc.complex;
    let n = cx.n;
    let vertices: Vec<Point> = (0..cx.vertex_count() as u32)
        .map(|v| cx.vertex(v))
        .collect();
    let total = cx.a_count() + cx.b_count();
    let simplices: Vec<Simplex> = (0..total).map(|i| Simplex::new(cx.maximal(i))).collect();
    let complex = SimplicialComplex::from_maximal(n, vertices, simplices.clone())
        .map_err(|e| e.to_string())?;
    let mut lower_maximal = Vec::new();
    for s in &simplices[cx.a_count()..] {
        let id = complex
            .find(s.vertices())
            .ok_or("lower simplex missing from the rebuilt complex")?;
        lower_maximal.push(id.index);
    }
    let values = doc
        .g_values
        .chunks_exact(n)
        .map(|c| Point::new(c).unwrap())
        .collect();
    Ok(ApproximantG {
        sub: subdivide_uniform(&complex, 0).map_err(|e| e.to_string())?,
        values,
        levels: 0,
        snap_error: 0.0,
        lower_maximal,
    })
}

fn exactness(docs: &[ResultDocument]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut containing = 0;
    for case in 0..100 {
        let (n, k) = match case % 10 {
            0..=3 => (2, 2),
            4..=6 => (3, 3),
            _ => (2, 1),
        };
        let vals: Vec<Vector> = (0..=k)
            .map(|_| {
                let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                Point::new(&c).unwrap()
            })
            .collect();
        let exact = certified_min_norm(&vals);
        let brute = brute_min_norm(&vals);
        ensure(
            brute >= exact - 1e-12,
            format!("case {case}: sampled {brute:e} below certified {exact:e}"),
        )?;
        worst = worst.max(brute - exact);
        if exact <= certificate_threshold(&vals) {
            containing += 1;
        }
    }
    ensure(worst <= 1e-6, format!("worst gap {worst:e} > 1e-6"))?;

    let mut verdicts = 0;
    for doc in docs {
        let g = approximant_from_doc(doc)?;
        if g.lower_maximal.is_empty() {
            continue;
        }
        let c = Point::new(&doc.c).unwrap();
        let (brute, _) = brute_force_avoidance_check(&g, &c, 16);
        let a = doc.complex.a_count();
        let exact = doc.certificates.margins[a..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        ensure(
            (exact > doc.certificates.threshold) == (brute > 0.0) && brute >= exact - 1e-12,
            format!("avoidance verdicts differ: certified {exact:e}, sampled {brute:e}"),
        )?;
        // A constant placed on the image of a lower vertex must be rejected by both.
        let v = g
            .complex()
            .simplex(doc.complex.n - 1, g.lower_maximal[0] as usize)[0];
        let on_image = -g.values[v as usize];
        let (hit, _) = brute_force_avoidance_check(&g, &on_image, 16);
        let b0 = doc.complex.maximal(a);
        let shifted: Vec<Vector> = b0
            .iter()
            .map(|&u| g.values[u as usize] + on_image)
            .collect();
        ensure(
            hit == 0.0 && certified_min_norm(&shifted) <= certificate_threshold(&shifted),
            "constant on the image was not rejected",
        )?;
        verdicts += 2;
    }
    ensure(verdicts > 0, "no corpus run with a lower skeleton")?;
    Ok(format!(
        "100 simplices ({containing} containing 0), worst gap {worst:.1e} <= 1e-6; {verdicts} avoidance verdicts agree"
    ))
}

fn clamp_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fixed = 0;
    for i in 0..100_000 {
        let n = 2 + i % 2;
        let rho = rng.random_range(0.01..2.0);
        let scale = 10f64.powf(rng.random_range(-3.0..1.0));
        let c: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-1.0..1.0) * scale)
            .collect();
        let x = Point::new(&c).unwrap();
        if x.norm() == 0.0 {
            continue;
        }
        let r = clamp_r(&x, rho).map_err(|e| e.to_string())?;
        let tol = 4.0 * f64::EPSILON * rho;
        ensure(
            r.norm() >= rho - tol,
            format!("|r(x)| = {} < rho = {rho}", r.norm()),
        )?;
        ensure(
            (r - x).norm() <= rho + tol,
            format!("|r(x) - x| = {} > rho = {rho}", (r - x).norm()),
        )?;
        ensure(
            (r == x) == (x.norm() >= rho),
            format!("fixed-point rule broken at {x:?}, rho {rho}"),
        )?;
        fixed += (r == x) as usize;
    }
    ensure(
        clamp_r(&Point::zero(2), 1.0).is_err(),
        "clamp accepted the zero vector",
    )?;
    Ok(format!(
        "100000 vectors ({fixed} fixed), |r| >= rho, |r - x| <= rho, zero rejected"
    ))
}

fn partition_suite() -> Outcome {
    let domain = disk().to_domain().map_err(|e| e.to_string())?;
    let tri = base_triangulation(&domain, 14, DEFAULT_MAX_SIMPLICES).map_err(|e| e.to_string())?;
    let cover = build_cover(&tri, &domain).map_err(|e| e.to_string())?;
    let ct = classify_simplices(tri, &domain).map_err(|e| e.to_string())?;
    let (ct, _) = repair_bad_simplices(ct, &domain, &cover).map_err(|e| e.to_string())?;
    let pu = PartitionOfUnity::new(&ct, &cover, &domain);
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut samples = e_random_samples(&domain, &mut rng, 5000);
    let n = ct.tri.n();
    for _ in 0..5000 {
        let i = rng.random_range(0..ct.tri.top_count());
        let pts = ct.tri.complex.positions(ct.tri.top_simplex(i));
        let mut w: Vec<f64> = (0..=n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        samples.push(Point::combination(&pts, &w));
    }
    let mut worst = 0.0f64;
    for x in &samples {
        let p = pu.eval(x).map_err(|e| e.to_string())?;
        worst = worst.max((1.0 - p.sum()).abs());
    }
    ensure(worst < 1e-9, format!("worst |1 - sum| = {worst:e}"))?;

    let q = q_samples(&ct, &mut rng, 1000);
    for x in &q {
        let w = pu.eval(x).map_err(|e| e.to_string())?.w;
        ensure(w == 1.0, format!("phi_W = {w} at Q point {x:?}"))?;
    }
    let boundary = boundary_samples(&domain, &mut rng, 1000);
    for x in &boundary {
        let w = pu.eval(x).map_err(|e| e.to_string())?.w;
        ensure(w == 0.0, format!("phi_W = {w} at boundary point {x:?}"))?;
    }
    Ok(format!(
        "worst |1 - sum| = {worst:.1e} over {} points; phi_W = 1 on {} Q points, 0 on {} boundary points",
        samples.len(),
        q.len(),
        boundary.len()
    ))
}

fn determinism(dir: &Path, docs: &mut Vec<ResultDocument>) -> Outcome {
    let (d, f) = write_inputs(dir, "det", &disk(), &disk_field());
    let mut outputs = Vec::new();
    for round in 0..2 {
        let json = dir.join(format!("det_{round}.json"));
        let svg = dir.join(format!("det_{round}.svg"));
        let out = approx(
            &d,
            &f,
            0.5,
            &json,
            &["--seed", "11", "--svg", svg.to_str().unwrap()],
        );
        ensure(
            out.status.code() == Some(0),
            format!("run {round} exit {:?}", out.status.code()),
        )?;
        outputs.push((std::fs::read(&json).unwrap(), std::fs::read(&svg).unwrap()));
    }
    ensure(
        outputs[0].0 == outputs[1].0,
        "result.json differs between runs",
    )?;
    ensure(outputs[0].1 == outputs[1].1, "SVG differs between runs")?;
    docs.push(read_json(&dir.join("det_0.json")).map_err(|e| e.to_string())?);
    Ok(format!(
        "result.json ({} bytes) and SVG ({} bytes) byte-identical across runs",
        outputs[0].0.len(),
        outputs[0].1.len()
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let dir = dir.path();
    let mut docs = Vec::new();
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    results.push(("1 disk end to end", disk_end_to_end(dir, &mut docs)));
    results.push((
        "2 curve, zero-free by the constant",
        curve_end_to_end(dir, &mut docs),
    ));
    results.push(("3 interior zero rejected", precondition_rejected(dir)));
    results.push(("4 annulus lower bound", annulus_bound(dir, &mut docs)));
    results.push(("5 repair on random rasters", repair_suite()));
    results.push(("9 determinism", determinism(dir, &mut docs)));
    results.push(("6 exact minimum norm", exactness(&docs)));
    results.push(("7 clamp", clamp_suite()));
    results.push(("8 partition of unity", partition_suite()));
    results.sort_by(|a, b| a.0.cmp(b.0));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS  criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  criterion {name}: {msg}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
