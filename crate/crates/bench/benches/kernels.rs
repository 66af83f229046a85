use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use muxsec_core::capacity::{channel_capacity, secrecy_capacity};
use muxsec_core::code::generate_codebook;
use muxsec_core::resolvability::resolvability_distance;
use muxsec_core::security::{exact_errors, exact_leakage};
use muxsec_core::spectrum::spectrum_at;
use muxsec_core::{Dist, Dmc, WiretapPair};
use std::hint::black_box;

fn capacity(c: &mut Criterion) {
    let w = Dmc::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.6, 0.3], vec![0.3, 0.3, 0.4]]).unwrap();
    c.bench_function("channel_capacity 3x3", |b| b.iter(|| channel_capacity(black_box(&w), 1e-9).unwrap()));
    let pair = WiretapPair::new(Dmc::bsc(0.1), Dmc::new(vec![vec![0.6, 0.4], vec![0.45, 0.55]]).unwrap()).unwrap();
    c.bench_function("secrecy_capacity 4 restarts", |b| b.iter(|| secrecy_capacity(black_box(&pair), 4, 1e-7, 1).unwrap()));
}

fn spectrum(c: &mut Criterion) {
    let w = Dmc::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.6, 0.3]]).unwrap();
    let p = Dist::uniform(2);
    let mut group = c.benchmark_group("spectrum_at");
    for n in [4, 8, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| spectrum_at(&p, &w, n).unwrap()));
    }
    group.finish();
}

fn exact_evaluation(c: &mut Criterion) {
    let p = Dist::uniform(2);
    let mut group = c.benchmark_group("exact");
    for n in [8, 12] {
        let code = generate_codebook(&p, n, &[4, 4], 0.3, 7).unwrap();
        group.bench_with_input(BenchmarkId::new("errors", n), &code, |b, code| {
            b.iter(|| exact_errors(code, &Dmc::bsc(0.1), &p).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("leakage", n), &code, |b, code| {
            b.iter(|| exact_leakage(code, &Dmc::bsc(0.3), 0).unwrap())
        });
    }
    group.finish();
}

fn resolvability(c: &mut Criterion) {
    let v = Dmc::bsc(0.3);
    let p = Dist::uniform(2);
    c.bench_function("resolvability_distance n=10 rate=0.5", |b| {
        b.iter(|| resolvability_distance(&v, &p, 10, 0.5, black_box(3)).unwrap())
    });
}

criterion_group!(kernels, capacity, spectrum, exact_evaluation, resolvability);
criterion_main!(kernels);
