use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dampwave_core::fv::{init_riemann, FvGrid};
use dampwave_core::viscous::{compute_v_profile, solve_u_profile};
use dampwave_core::{evaluate_exact, ProfileConfig, RiemannProblem};

fn delta() -> RiemannProblem {
    RiemannProblem::new(1.0, 1.0, 2.0, 0.0, 1, 1.0).unwrap()
}

fn exact(c: &mut Criterion) {
    let p = delta();
    let xs: Vec<f64> = (0..1000).map(|i| -2.0 + 4.0 * i as f64 / 999.0).collect();
    c.bench_function("evaluate_exact/1000_points", |b| {
        b.iter(|| xs.iter().map(|&x| evaluate_exact(&p, black_box(x), 1.0).unwrap().u).sum::<f64>())
    });
}

fn profile(c: &mut Criterion) {
    let p = delta();
    let mut g = c.benchmark_group("viscous_profile");
    g.sample_size(10);
    for eps in [0.1, 0.05] {
        let cfg = ProfileConfig::for_problem(&p, eps);
        g.bench_with_input(BenchmarkId::new("solve_u", eps), &cfg, |b, cfg| {
            b.iter(|| solve_u_profile(&p, cfg).unwrap())
        });
        let u = solve_u_profile(&p, &cfg).unwrap();
        g.bench_with_input(BenchmarkId::new("density", eps), &u, |b, u| {
            b.iter(|| compute_v_profile(u.clone(), &p).unwrap())
        });
    }
    g.finish();
}

fn finite_volume(c: &mut Criterion) {
    let p = delta();
    let mut g = c.benchmark_group("fv_step");
    for n in [1000, 4000] {
        let state = init_riemann(FvGrid::new(-2.0, 2.0, n).unwrap(), &p);
        g.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, s| {
            b.iter_batched_ref(|| s.clone(), |s| s.step(0.5).unwrap(), criterion::BatchSize::SmallInput)
        });
    }
    g.finish();
}

criterion_group!(benches, exact, profile, finite_volume);
criterion_main!(benches);
