use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hypdiam_bench::connected_surface;
use hypdiam_core::hexagon::build_hexagon;
use hypdiam_core::lattice::enumerate_ball;
use hypdiam_core::peeling::explore;
use hypdiam_core::surface::{auto_ell, diameter_estimate_with, midpoint_distances_from, DiameterOptions};

fn hexagon(c: &mut Criterion) {
    c.bench_function("build_hexagon/ell=6", |b| b.iter(|| build_hexagon(std::hint::black_box(6.0)).unwrap()));
}

fn lattice(c: &mut Criterion) {
    let hex = build_hexagon(6.0).unwrap();
    let mut group = c.benchmark_group("enumerate_ball");
    for r in [6.0, 9.0, 12.0] {
        group.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| {
            b.iter(|| enumerate_ball(&hex, r).unwrap().count)
        });
    }
    group.finish();
}

fn surface(c: &mut Criterion) {
    let mut group = c.benchmark_group("surface");
    group.sample_size(10);
    for genus in [64u64, 256] {
        let s = connected_surface(genus);
        group.bench_with_input(BenchmarkId::new("single_source", genus), &s, |b, s| {
            b.iter(|| midpoint_distances_from(s, 0, 8.0).unwrap().nodes_expanded)
        });
        group.bench_with_input(BenchmarkId::new("diameter", genus), &s, |b, s| {
            b.iter(|| diameter_estimate_with(s, &DiameterOptions::default()).unwrap().midpoint_diameter)
        });
    }
    group.finish();
}

fn peeling(c: &mut Criterion) {
    let mut group = c.benchmark_group("explore");
    for genus in [256u64, 1026] {
        group.bench_with_input(BenchmarkId::from_parameter(genus), &genus, |b, &g| {
            b.iter(|| explore(g, 1, auto_ell(g), 0.4, 3).unwrap().bad_phase2)
        });
    }
    group.finish();
}

criterion_group!(benches, hexagon, lattice, surface, peeling);
criterion_main!(benches);
