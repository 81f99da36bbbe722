#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use zerofree_core::io::{to_json, DomainDoc, FieldDoc};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zerofree"))
}

/// Grid cells of `shape x shape` nodes-spaced-by-one whose four corners
/// satisfy `keep` (integer node coordinates relative to the center node).
fn raster(shape: i64, keep: impl Fn(i64) -> bool) -> Vec<Vec<i64>> {
    let c = shape / 2;
    let mut cells = Vec::new();
    for i in 0..shape {
        for j in 0..shape {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            if corners
                .iter()
                .all(|&(a, b)| keep((a - c) * (a - c) + (b - c) * (b - c)))
            {
                cells.push(vec![i, j]);
            }
        }
    }
    cells
}

fn square_doc(origin: f64, spacing: f64, shape: usize, cells: Vec<Vec<i64>>) -> DomainDoc {
    DomainDoc {
        n: 2,
        origin: vec![origin, origin],
        spacing,
        shape: vec![shape, shape],
        cells,
        vertices: vec![],
        edges: vec![],
        facets: vec![],
    }
}

/// Cells of spacing 0.2 inside the closed unit disk.
pub fn disk() -> DomainDoc {
    square_doc(-1.0, 0.2, 10, raster(10, |r2| r2 <= 25))
}

/// Cells of spacing 0.1 with 0.5 <= |x| <= 1 at every corner.
pub fn annulus() -> DomainDoc {
    square_doc(-1.0, 0.1, 20, raster(20, |r2| (25..=100).contains(&r2)))
}

/// The boundary of the square [-1, 1]^2 as grid edges of spacing 0.5.
pub fn curve() -> DomainDoc {
    let mut edges = Vec::new();
    for i in 0..4 {
        edges.push(vec![i, 0, 0]);
        edges.push(vec![i, 4, 0]);
        edges.push(vec![0, i, 1]);
        edges.push(vec![4, i, 1]);
    }
    DomainDoc {
        edges,
        ..square_doc(-1.0, 0.5, 4, vec![])
    }
}

pub fn disk_field() -> FieldDoc {
    FieldDoc::exprs(&["1 - x1^2 - x2^2", "0"])
}

pub fn identity_field() -> FieldDoc {
    FieldDoc::exprs(&["x1", "x2"])
}

/// Vanishes at (1, 0), a node of the curve.
pub fn curve_field() -> FieldDoc {
    FieldDoc::exprs(&["x1 - 1", "x2"])
}

pub fn write_inputs(
    dir: &Path,
    name: &str,
    domain: &DomainDoc,
    field: &FieldDoc,
) -> (PathBuf, PathBuf) {
    let d = dir.join(format!("{name}_domain.json"));
    let f = dir.join(format!("{name}_field.json"));
    std::fs::write(&d, to_json(domain)).unwrap();
    std::fs::write(&f, to_json(field)).unwrap();
    (d, f)
}

pub fn approx(domain: &Path, field: &Path, epsilon: f64, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("approx")
        .arg("--domain")
        .arg(domain)
        .arg("--field")
        .arg(field)
        .arg("--epsilon")
        .arg(epsilon.to_string())
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}
