mod common;

use std::path::Path;

use common::*;
use zerofree_core::io::{
    check_document, from_json, read_json, to_json, CheckReport, DomainDoc, FieldDoc, ResultDocument,
};

fn code(out: &std::process::Output) -> i32 {
    out.status.code().expect("exited")
}

#[test]
fn fixtures_match_generators() {
    let dir = fixtures_dir();
    let expected: [(&str, Vec<u8>); 6] = [
        ("disk.json", to_json(&disk())),
        ("annulus.json", to_json(&annulus())),
        ("curve.json", to_json(&curve())),
        ("disk_field.json", to_json(&disk_field())),
        ("identity_field.json", to_json(&identity_field())),
        ("curve_field.json", to_json(&curve_field())),
    ];
    for (name, bytes) in expected {
        let p = dir.join(name);
        if std::env::var_os("ZEROFREE_WRITE_FIXTURES").is_some() {
            std::fs::write(&p, &bytes).unwrap();
        }
        assert_eq!(std::fs::read(&p).unwrap(), bytes, "{name} is stale");
    }
    let d: DomainDoc = read_json(&dir.join("disk.json")).unwrap();
    assert_eq!(d.cells.len(), 60);
    assert!(read_json::<FieldDoc>(&dir.join("curve_field.json")).is_ok());
}

#[test]
fn validate_prints_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (d, f) = write_inputs(dir.path(), "disk", &disk(), &disk_field());
    let out = bin()
        .args(["validate", "--epsilon", "0.1", "--domain"])
        .arg(&d)
        .arg("--field")
        .arg(&f)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["cells"], 60);
    assert_eq!(v["has_interior"], true);
    assert!(v["subdivisions"].as_i64().unwrap() >= 5);
}

fn coarse_disk_run(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let (d, f) = write_inputs(dir, "disk", &disk(), &disk_field());
    let out_path = dir.join("result.json");
    let svg = dir.join("result.svg");
    let out = approx(
        &d,
        &f,
        1.0,
        &out_path,
        &["--svg", svg.to_str().unwrap(), "--seed", "7"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (out_path, svg)
}

#[test]
fn approx_check_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let (result, svg) = coarse_disk_run(dir.path());
    let doc: ResultDocument = read_json(&result).unwrap();
    assert!(doc.certificates.mu > 0.0);
    assert!(doc.oracle.sup_error.value < 1.0);
    assert_eq!(doc.config.run.seed, 7);

    let out = bin().arg("check").arg(&result).output().unwrap();
    assert_eq!(code(&out), 0);
    let report: CheckReport = from_json(&out.stdout, "report").unwrap();
    assert!(report.passed);
    assert_eq!(report.mu, doc.certificates.mu);

    let again = dir.path().join("again.svg");
    let out = bin()
        .arg("render")
        .arg(&result)
        .arg("--svg")
        .arg(&again)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&svg).unwrap(), std::fs::read(&again).unwrap());
    assert!(std::fs::read_to_string(&again).unwrap().contains("<svg"));
}

#[test]
fn tampered_document_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let (result, _) = coarse_disk_run(dir.path());
    let mut doc: ResultDocument = read_json(&result).unwrap();
    let n = doc.complex.n;
    let v = doc.complex.a[0] as usize;
    for d in 0..n {
        doc.g_values[v * n + d] = -doc.c[d];
    }
    assert!(!check_document(&doc).passed);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, to_json(&doc)).unwrap();
    let out = bin().arg("check").arg(&bad).output().unwrap();
    assert_eq!(code(&out), 5);
    let report: CheckReport = from_json(&out.stdout, "report").unwrap();
    assert!(!report.passed);
    assert!(report.failures.iter().any(|f| f.simplex == Some((2, 0))));
}

#[test]
fn zero_in_the_interior_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let (d, f) = write_inputs(dir.path(), "disk", &disk(), &identity_field());
    let out_path = dir.path().join("result.json");
    let out = approx(&d, &f, 0.5, &out_path, &[]);
    assert_eq!(code(&out), 2);
    assert!(!out_path.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("precondition"));
}

#[test]
fn tiny_epsilon_hits_the_resource_cap() {
    let dir = tempfile::tempdir().unwrap();
    let (d, f) = write_inputs(dir.path(), "disk", &disk(), &disk_field());
    let out_path = dir.path().join("result.json");
    let out = approx(&d, &f, 1e-5, &out_path, &[]);
    assert_eq!(code(&out), 3);
    assert!(!out_path.exists());
    let out = approx(&d, &f, 0.5, &out_path, &["--max-simplices", "1000"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn input_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let (d, f) = write_inputs(dir.path(), "disk", &disk(), &disk_field());
    let out_path = dir.path().join("result.json");
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&approx(&missing, &f, 0.5, &out_path, &[])), 4);
    assert_eq!(code(&approx(&d, &f, -1.0, &out_path, &[])), 4);
    assert_eq!(
        code(&bin().args(["approx", "--bogus"]).output().unwrap()),
        4
    );

    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, b"{\"n\": 2,").unwrap();
    assert_eq!(code(&approx(&garbled, &f, 0.5, &out_path, &[])), 4);
    let bad_expr = dir.path().join("bad_field.json");
    std::fs::write(&bad_expr, br#"{"exprs":["x1 +* 2","x2"]}"#).unwrap();
    assert_eq!(code(&approx(&d, &bad_expr, 0.5, &out_path, &[])), 4);
    assert_eq!(code(&bin().arg("check").arg(&missing).output().unwrap()), 4);
    assert!(!out_path.exists());
    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);
}
