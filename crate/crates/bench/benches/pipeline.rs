use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;
use zerofree_bench::{disk, disk_field, value_sets};
use zerofree_core::io::{run_pipeline, RunConfig};
use zerofree_core::simplicial::min_norm_hull;
use zerofree_core::triangulate::{
    base_triangulation, build_cover, classify_simplices, repair_bad_simplices,
    DEFAULT_MAX_SIMPLICES,
};

fn hull(c: &mut Criterion) {
    let mut g = c.benchmark_group("min_norm_hull");
    for (name, n, k) in [
        ("segment_2d", 2, 1),
        ("triangle_2d", 2, 2),
        ("triangle_3d", 3, 2),
        ("tetra_3d", 3, 3),
    ] {
        let sets = value_sets(n, k, 1000);
        g.bench_function(name, |b| {
            b.iter(|| {
                sets.iter()
                    .map(|s| min_norm_hull(black_box(s)))
                    .sum::<f64>()
            })
        });
    }
    g.finish();
}

fn triangulation(c: &mut Criterion) {
    let domain = disk().to_domain().unwrap();
    let mut g = c.benchmark_group("triangulate_disk");
    for k in [8i64, 32] {
        g.bench_function(format!("base_k{k}"), |b| {
            b.iter(|| base_triangulation(black_box(&domain), k, DEFAULT_MAX_SIMPLICES).unwrap())
        });
        g.bench_function(format!("classify_repair_k{k}"), |b| {
            b.iter_batched(
                || base_triangulation(&domain, k, DEFAULT_MAX_SIMPLICES).unwrap(),
                |tri| {
                    let cover = build_cover(&tri, &domain).unwrap();
                    let ct = classify_simplices(tri, &domain).unwrap();
                    repair_bad_simplices(ct, &domain, &cover).unwrap()
                },
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let (domain, field) = (disk(), disk_field());
    let cfg = RunConfig::new(1.0);
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    g.bench_function("disk_eps_1", |b| {
        b.iter(|| run_pipeline(&domain, &field, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, hull, triangulation, pipeline);
criterion_main!(benches);
