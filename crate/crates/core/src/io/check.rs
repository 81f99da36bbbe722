use serde::{Deserialize, Serialize};

use super::pipeline::{ResultDocument, RESULT_FORMAT};
use crate::simplicial::{Point, Vector};
use crate::zerofree::{certificate_threshold, certified_min_norm};

const MAX_REPORTED: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckFailure {
    /// (dimension, index within that dimension's list) when the failure
    /// belongs to one simplex.
    pub simplex: Option<(usize, usize)>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub mu: f64,
    pub simplices_checked: usize,
    pub failure_count: usize,
    /// The first failures found; lower-skeleton certificates are checked
    /// before the n-simplices.
    pub failures: Vec<CheckFailure>,
}

struct Failures {
    count: usize,
    list: Vec<CheckFailure>,
}

impl Failures {
    fn push(&mut self, simplex: Option<(usize, usize)>, message: String) {
        self.count += 1;
        if self.list.len() < MAX_REPORTED {
            self.list.push(CheckFailure { simplex, message });
        }
    }
}

fn points(flat: &[f64], n: usize) -> Option<Vec<Point>> {
    flat.chunks_exact(n).map(|c| Point::new(c).ok()).collect()
}

/// Recomputes every hull certificate from the stored vertex values and the
/// constant, and compares them with the stored margins, μ and m_A. Needs no
/// field expression.
pub fn check_document(doc: &ResultDocument) -> CheckReport {
    let mut f = Failures {
        count: 0,
        list: Vec::new(),
    };
    let cx = &doc.complex;
    let n = cx.n;
    let structural = |m: &str| CheckReport {
        passed: false,
        mu: doc.certificates.mu,
        simplices_checked: 0,
        failure_count: 1,
        failures: vec![CheckFailure {
            simplex: None,
            message: m.to_string(),
        }],
    };
    if doc.format != RESULT_FORMAT {
        return structural(&format!("unknown format tag {:?}", doc.format));
    }
    if !(n == 2 || n == 3) {
        return structural(&format!("unsupported dimension {n}"));
    }
    if cx.vertices.len() % n != 0 || cx.a.len() % (n + 1) != 0 || cx.b.len() % n != 0 {
        return structural("complex arrays have the wrong lengths");
    }
    let nv = cx.vertex_count();
    if doc.g_values.len() != nv * n || doc.c.len() != n {
        return structural("value arrays do not match the complex");
    }
    if cx.a.iter().chain(&cx.b).any(|&v| v as usize >= nv) {
        return structural("simplex refers to a missing vertex");
    }
    let total = cx.a_count() + cx.b_count();
    if doc.certificates.margins.len() != total {
        return structural("margin list does not match the complex");
    }
    let (Some(g), Some(c)) = (points(&doc.g_values, n), Point::new(&doc.c).ok()) else {
        return structural("values are not finite");
    };
    let values: Vec<Vector> = g.iter().map(|v| *v + c).collect();
    let threshold = certificate_threshold(&values);

    let a = cx.a_count();
    let mut margins = vec![0.0; total];
    // Lower skeleton first: a wrong constant shows up there.
    for i in (a..total).chain(0..a) {
        let ids = cx.maximal(i);
        let vals: Vec<Vector> = ids.iter().map(|&v| values[v as usize]).collect();
        let m = certified_min_norm(&vals);
        margins[i] = m;
        let at = if i < a { (n, i) } else { (n - 1, i - a) };
        if m <= threshold {
            f.push(
                Some(at),
                format!("hull of the values contains zero (min norm {m:e})"),
            );
        } else if m != doc.certificates.margins[i] {
            f.push(
                Some(at),
                format!(
                    "stored margin {:e} recomputes to {m:e}",
                    doc.certificates.margins[i]
                ),
            );
        }
    }
    if threshold != doc.certificates.threshold {
        f.push(
            None,
            format!(
                "threshold {:e} recomputes to {threshold:e}",
                doc.certificates.threshold
            ),
        );
    }
    let mu = margins.iter().copied().fold(f64::INFINITY, f64::min);
    if mu != doc.certificates.mu {
        f.push(
            None,
            format!("stored mu {:e} recomputes to {mu:e}", doc.certificates.mu),
        );
    }

    let mut m_a = f64::INFINITY;
    for i in 0..a {
        let vals: Vec<Vector> = cx.maximal(i).iter().map(|&v| g[v as usize]).collect();
        m_a = m_a.min(certified_min_norm(&vals));
    }
    let stored_m_a = doc.certificates.m_a.unwrap_or(f64::INFINITY);
    if m_a != stored_m_a {
        f.push(
            None,
            format!("stored m_A {stored_m_a:e} recomputes to {m_a:e}"),
        );
    }
    let c_norm = c.norm();
    if c_norm != doc.ledger.constant_norm || c_norm >= doc.ledger.constant_budget || c_norm >= m_a {
        f.push(
            None,
            format!(
                "|c| = {c_norm:e} does not match the ledger ({:e}) or exceeds its bounds",
                doc.ledger.constant_norm
            ),
        );
    }
    if !doc.oracle.all_passed() || doc.oracle.sup_error.value >= doc.epsilon() {
        f.push(None, "the stored oracle report records a failure".into());
    }
    CheckReport {
        passed: f.count == 0 && mu > 0.0,
        mu,
        simplices_checked: total,
        failure_count: f.count,
        failures: f.list,
    }
}

#[cfg(test)]
mod tests {
    use super::super::pipeline::tests::small_disk_run;
    use super::*;

    #[test]
    fn untampered_document_passes() {
        let doc = small_disk_run();
        let r = check_document(&doc);
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.mu, doc.certificates.mu);
        assert_eq!(r.simplices_checked, doc.certificates.margins.len());
    }

    #[test]
    fn zeroed_vertex_fails_on_its_simplex() {
        let mut doc = small_disk_run();
        let v = doc.complex.a[0] as usize;
        let n = doc.complex.n;
        for d in 0..n {
            doc.g_values[v * n + d] = -doc.c[d];
        }
        let r = check_document(&doc);
        assert!(!r.passed);
        assert!(r
            .failures
            .iter()
            .any(|f| f.simplex == Some((2, 0)) && f.message.contains("contains zero")));
    }

    #[test]
    fn altered_constant_fails_on_the_lower_skeleton() {
        let mut doc = small_disk_run();
        assert!(doc.complex.b_count() > 0);
        doc.c[0] += 1e-7;
        let r = check_document(&doc);
        assert!(!r.passed);
        assert_eq!(r.failures[0].simplex.map(|s| s.0), Some(1));
    }

    #[test]
    fn structural_damage_is_reported() {
        let mut doc = small_disk_run();
        doc.complex.a.pop();
        assert!(!check_document(&doc).passed);
        let mut doc = small_disk_run();
        doc.format = "other".into();
        assert!(!check_document(&doc).passed);
    }
}
