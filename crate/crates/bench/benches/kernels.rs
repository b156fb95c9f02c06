use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use renorm_bench::{accumulation_map, doubling, feigenbaum_point};
use renorm_core::cascade::{superstable_parameter, Family};
use renorm_core::renorm::{renormalize_opts, RenormOptions};
use renorm_core::series::AnalyticSeries;
use renorm_core::spectral::{jacobian, spectrum, DEFAULT_FD_STEP};
use std::hint::black_box;

fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("series");
    for degree in [16, 48, 96] {
        group.bench_with_input(BenchmarkId::new("fit", degree), &degree, |b, &d| {
            b.iter(|| AnalyticSeries::fit(|y| (1.5 * y).sin() - 0.3 * y * y, [-1.0, 0.0], d).unwrap())
        });
        let s = AnalyticSeries::fit(|y| (1.5 * y).sin(), [-1.0, 0.0], degree).unwrap();
        group.bench_with_input(BenchmarkId::new("eval", degree), &s, |b, s| b.iter(|| s.value(black_box(-0.37))));
    }
    group.finish();
}

fn renormalization(c: &mut Criterion) {
    let f = accumulation_map(2.0);
    let opts = RenormOptions::truncated(40, 8);
    c.bench_function("renormalize/accumulation degree 40", |b| b.iter(|| renormalize_opts(black_box(&f), &opts).unwrap()));
    let fam = Family::standard(2.0).unwrap();
    c.bench_function("superstable/period 64", |b| {
        b.iter(|| superstable_parameter(&fam, 6, black_box([0.7848, 0.7850])).unwrap())
    });
}

fn spectral(c: &mut Criterion) {
    let fp = feigenbaum_point(40);
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    group.bench_function("jacobian degree 40", |b| {
        b.iter(|| jacobian(2.0, &doubling(), &fp.point, DEFAULT_FD_STEP).unwrap())
    });
    let j = jacobian(2.0, &doubling(), &fp.point, DEFAULT_FD_STEP).unwrap();
    group.bench_function("eigenvalues degree 40", |b| b.iter(|| spectrum(black_box(&j)).unwrap()));
    group.finish();
}

criterion_group!(benches, series, renormalization, spectral);
criterion_main!(benches);
