use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mvpac::bounds::{evaluate_bound, invert_kl, BoundConfig, BoundInputs, BoundName};
use mvpac::data::{augment_and_scale, gen_synthetic, split, Partition, SplitPlan, SyntheticConfig};
use mvpac::experiment::{fit, Algorithm, Penalty};
use mvpac::qp::{solve_box_qp, QpProblem, SolverOptions};
use mvpac::Matrix;

fn partition(fraction: f64) -> Partition {
    let ds = augment_and_scale(&gen_synthetic(&SyntheticConfig::default()).unwrap()).unwrap();
    split(&ds, &SplitPlan::new(0, fraction), 0).unwrap()
}

fn dense_qp(n: usize) -> QpProblem {
    // deterministic, well-conditioned SPD matrix
    let a = Matrix::from_fn(n, n, |i, j| ((i * 7 + j * 13) as f64).sin());
    let mut h = a.tr_matmul(&a).unwrap();
    h.add_diagonal(0.1);
    let c = (0..n).map(|i| ((i * 3) as f64).cos()).collect();
    QpProblem::new(h, c, vec![0.0; n], vec![1.0; n]).unwrap()
}

fn qp(c: &mut Criterion) {
    let mut group = c.benchmark_group("box_qp");
    for n in [20, 100] {
        let p = dense_qp(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| solve_box_qp(black_box(p), &SolverOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn trainers(c: &mut Criterion) {
    let part = partition(0.2);
    let opts = SolverOptions::with_tol(1e-6);
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for (alg, penalty) in [
        (Algorithm::Svm1, Penalty::Single { c: 1.0 }),
        (Algorithm::Svm3, Penalty::Single { c: 50.0 }),
        (Algorithm::MvSvm, Penalty::Pair { c1: 1.0, c2: 0.01 }),
        (Algorithm::SMvSvm, Penalty::Pair { c1: 1.0, c2: 0.01 }),
    ] {
        group.bench_function(alg.as_str(), |b| {
            b.iter(|| fit(alg, penalty, black_box(&part.train), &part.unlabeled, &opts).unwrap())
        });
    }
    group.finish();
}

fn bounds(c: &mut Criterion) {
    let part = partition(0.2);
    let opts = SolverOptions::with_tol(1e-6);
    let w = fit(Algorithm::MvSvm, Penalty::Pair { c1: 1.0, c2: 0.01 }, &part.train, &part.unlabeled, &opts).unwrap();
    let inputs = BoundInputs {
        weights: &w,
        labeled: &part.train,
        unlabeled: &part.unlabeled,
        prior_count: 0,
        prior_weights: None,
    };
    let config = BoundConfig::default();
    let mut group = c.benchmark_group("bound");
    for name in [BoundName::MvPb1, BoundName::MvPb4, BoundName::SMvPb1] {
        group.bench_function(name.as_str(), |b| b.iter(|| evaluate_bound(name, black_box(&inputs), &config).unwrap()));
    }
    group.finish();
    c.bench_function("invert_kl", |b| b.iter(|| invert_kl(black_box(0.1), black_box(0.35))));
}

criterion_group!(benches, qp, trainers, bounds);
criterion_main!(benches);
