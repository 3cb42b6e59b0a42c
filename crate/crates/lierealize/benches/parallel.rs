//! Parallel vs sequential timing for the two heavy verification suites.
//!
//! Build with `--no-default-features` to measure the pure sequential build;
//! with the default `parallel` feature the comparison below toggles rayon at
//! run time.

use criterion::{criterion_group, criterion_main, Criterion};
use lie_realize::{catalog, proofcheck};

fn bench_catalog(c: &mut Criterion) {
    let mut group = c.benchmark_group("catalog_verify_all");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| catalog::verify_all(1, true).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| catalog::verify_all(1, false).unwrap())
    });
    group.finish();
}

fn bench_transform_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform_suite_20");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| proofcheck::transform_suite(20, 7, true).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| proofcheck::transform_suite(20, 7, false).unwrap())
    });
    group.finish();
}

fn bench_lie_ode_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("lie_ode_suite_50");
    group.bench_function("parallel", |b| {
        b.iter(|| proofcheck::lie_ode_suite(50, 7, true).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| proofcheck::lie_ode_suite(50, 7, false).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_catalog, bench_transform_suite, bench_lie_ode_suite);
criterion_main!(benches);
