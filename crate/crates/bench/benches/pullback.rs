use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use psf_core::lambert::lambert_w;
use psf_core::{
    canonical_basis, initial_configuration, iterate, oracle_solve, pullback_step, push_forward_at,
    qd_norm, Complex64, FamilyParams, IterationSettings, NewtonSettings, OracleSettings,
    OrbitPortrait, QuadSettings,
};

fn exp_k1_l1() -> OrbitPortrait {
    OrbitPortrait {
        k1: 1,
        l: 1,
        branch: vec![0, 0, 1],
        ..OrbitPortrait::exp_fixed(1)
    }
}

fn pullback(c: &mut Criterion) {
    let port = exp_k1_l1();
    let config = initial_configuration(&port);
    let newton = NewtonSettings::default();
    c.bench_function("pullback_step exp k1=1 l=1", |b| {
        b.iter(|| pullback_step(black_box(&port), black_box(&config), None, &newton).unwrap())
    });
    let settings = IterationSettings::default();
    c.bench_function("iterate exp k1=1 l=1", |b| {
        b.iter(|| iterate(black_box(&port), &settings))
    });
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("oracle_solve exp k1=1 l=1", |b| {
        b.iter(|| oracle_solve(black_box(&port), &OracleSettings::default()).unwrap())
    });
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let x = Complex64::new(2.0, 3.0);
    c.bench_function("lambert_w branch -2", |b| {
        b.iter(|| lambert_w(black_box(x), -2).unwrap())
    });

    let lambda = Complex64::new(1.461204320912689, 0.8445316069764756);
    let params = FamilyParams::Exp { lambda };
    let q = canonical_basis(&[
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        lambda.exp(),
    ])
    .unwrap()
    .remove(0);
    let z = Complex64::new(0.3, 0.7);
    c.bench_function("push_forward_at M=64", |b| {
        b.iter(|| push_forward_at(black_box(&q), &params, black_box(z), 64).unwrap())
    });
    let mut group = c.benchmark_group("quadrature");
    group.sample_size(10);
    group.bench_function("qd_norm canonical", |b| {
        b.iter(|| qd_norm(black_box(&q), &QuadSettings::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, pullback, kernels);
criterion_main!(benches);
