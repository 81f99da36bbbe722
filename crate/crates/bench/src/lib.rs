//! Inputs shared by the benchmarks.

use zerofree_core::io::{DomainDoc, FieldDoc};
use zerofree_core::simplicial::Point;

/// Cells of spacing 0.2 inside the closed unit disk.
pub fn disk() -> DomainDoc {
    let mut cells = Vec::new();
    for i in 0..10i64 {
        for j in 0..10i64 {
            let inside = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
                .iter()
                .all(|&(a, b)| (a - 5) * (a - 5) + (b - 5) * (b - 5) <= 25);
            if inside {
                cells.push(vec![i, j]);
            }
        }
    }
    DomainDoc {
        n: 2,
        origin: vec![-1.0, -1.0],
        spacing: 0.2,
        shape: vec![10, 10],
        cells,
        vertices: vec![],
        edges: vec![],
        facets: vec![],
    }
}

pub fn disk_field() -> FieldDoc {
    FieldDoc::exprs(&["1 - x1^2 - x2^2", "0"])
}

/// Deterministic pseudo-random vertex values in [-1, 1]^n, `count` groups of
/// `k + 1`.
pub fn value_sets(n: usize, k: usize, count: usize) -> Vec<Vec<Point>> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    (0..count)
        .map(|_| {
            (0..=k)
                .map(|_| {
                    let c: Vec<f64> = (0..n).map(|_| next()).collect();
                    Point::new(&c).unwrap()
                })
                .collect()
        })
        .collect()
}
