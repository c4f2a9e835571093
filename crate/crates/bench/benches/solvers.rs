use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use l1l2::prox::{prox_ratio_nonneg, ProxQuery};
use l1l2::rng::rng_from_seed;
use l1l2::solvers::{admm_plus, precompute_woodbury, y_update, SolverConfig};
use l1l2_bench::dct_problem;
use nalgebra::DVector;
use rand::Rng;
use std::hint::black_box;

fn prox(c: &mut Criterion) {
    let mut group = c.benchmark_group("prox_ratio_nonneg");
    for n in [64usize, 1024, 16384] {
        let mut rng = rng_from_seed(n as u64);
        let q = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.3);
        let query = ProxQuery::new(q, 2.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &query, |b, query| {
            b.iter(|| prox_ratio_nonneg(black_box(query)).unwrap())
        });
    }
    group.finish();
}

fn woodbury(c: &mut Criterion) {
    let p = dct_problem(64, 256, 10.0, 8, 1e-3, 1);
    let factor = precompute_woodbury(p.a(), 0.025).unwrap();
    let z = DVector::from_element(256, 0.1);
    let x = DVector::from_element(256, 0.2);
    c.bench_function("precompute_woodbury 64x256", |b| {
        b.iter(|| precompute_woodbury(black_box(p.a()), 0.025).unwrap())
    });
    c.bench_function("y_update 64x256", |b| {
        b.iter(|| y_update(&factor, p.a(), p.b(), black_box(&z), black_box(&x)).unwrap())
    });
}

fn admm(c: &mut Criterion) {
    let p = dct_problem(20, 50, 1.0, 3, 1e-3, 2);
    let config = SolverConfig {
        beta: 1.0,
        ..SolverConfig::default()
    };
    c.bench_function("admm_plus 20x50", |b| {
        b.iter(|| admm_plus(black_box(&p), &config).unwrap())
    });
}

criterion_group!(benches, prox, woodbury, admm);
criterion_main!(benches);
