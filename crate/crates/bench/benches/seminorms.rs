use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fraclab_core::filterbank::{Filterbank, Profile};
use fraclab_core::{forward_spectrum, frac_laplacian_integral, sample, triebel_lizorkin, Descriptor, DifferenceProfile, GridSpec};

fn fields(n: usize) -> (GridSpec, fraclab_core::SampledField) {
    let grid = GridSpec::new(1, n, 40.0).unwrap();
    let f = sample(&Descriptor::random(42), &grid).unwrap();
    (grid, f)
}

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_spectrum");
    for n in [1024, 4096, 16384] {
        let (_, f) = fields(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| forward_spectrum(black_box(f))));
    }
    group.finish();
}

fn gagliardo(c: &mut Criterion) {
    let mut group = c.benchmark_group("gagliardo");
    group.sample_size(10);
    for n in [1024, 4096] {
        let (_, f) = fields(n);
        group.bench_with_input(BenchmarkId::new("profile", n), &f, |b, f| {
            b.iter(|| DifferenceProfile::new(black_box(f), 2.0, 15.0).unwrap())
        });
        let profile = DifferenceProfile::new(&f, 2.0, 15.0).unwrap();
        group.bench_with_input(BenchmarkId::new("evaluate", n), &profile, |b, p| {
            b.iter(|| p.evaluate(black_box(0.5)).unwrap())
        });
    }
    group.finish();
}

fn spectral_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("triebel_lizorkin");
    for n in [1024, 4096] {
        let (grid, f) = fields(n);
        let fb = Filterbank::for_grid(&grid, Profile::default()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| triebel_lizorkin(black_box(f), &fb, 0.5, 3.0, 2.0).unwrap())
        });
    }
    group.finish();
}

fn integral_laplacian(c: &mut Criterion) {
    let (_, f) = fields(4096);
    c.bench_function("frac_laplacian_integral/4096", |b| {
        b.iter(|| frac_laplacian_integral(black_box(&f), 1.0, 15.0).unwrap())
    });
}

criterion_group!(benches, fft, gagliardo, spectral_norms, integral_laplacian);
criterion_main!(benches);
