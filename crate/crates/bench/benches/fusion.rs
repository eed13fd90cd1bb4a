use byzfuse::dp::{naive_subset_sum, subset_sum};
use byzfuse::game::{solve_mixed, Matrix};
use byzfuse::{fuse, ByzantineModel, FusionAssumption};
use byzfuse_bench::{random_weights, reports};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn subset_sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("subset_sum");
    for n in [12usize, 16, 20] {
        let w = random_weights(n, 1);
        let k = n / 2 - 1;
        group.bench_with_input(BenchmarkId::new("dp", n), &w, |b, w| {
            b.iter(|| subset_sum(black_box(w), k).unwrap())
        });
        if n <= 16 {
            group.bench_with_input(BenchmarkId::new("naive", n), &w, |b, w| {
                b.iter(|| naive_subset_sum(black_box(w), k).unwrap())
            });
        }
    }
    group.finish();
}

fn fusion_rules(c: &mut Criterion) {
    let mut group = c.benchmark_group("fuse");
    let r = reports(20, 4, 6, 0.1, 1.0, 7);
    for (name, model) in [
        ("independent", ByzantineModel::IndependentAlpha(0.3)),
        ("fixed", ByzantineModel::FixedCount(6)),
        ("bounded", ByzantineModel::BoundedBelowHalf),
    ] {
        let a = FusionAssumption::new(model, 0.1, 0.8).unwrap();
        group.bench_function(BenchmarkId::new(name, "n20_m4"), |b| {
            b.iter(|| fuse(black_box(&r), &a).unwrap())
        });
    }
    group.finish();
}

fn game_solver(c: &mut Criterion) {
    // Printed n_B = 8, m = 4 payoff (x 1e-3); no saddle point.
    let rows = vec![
        vec![1.2, 1.4, 1.9, 3.1, 6.3, 18.9],
        vec![1.5, 1.4, 1.4, 2.0, 3.7, 10.0],
        vec![1.4, 1.1, 0.945, 1.1, 1.7, 4.0],
        vec![1.4, 0.95, 0.715, 0.58, 0.675, 1.2],
        vec![2.1, 1.4, 0.995, 0.745, 0.71, 0.78],
        vec![7.3, 5.7, 5.3, 3.7, 3.0, 2.9],
    ];
    let a = Matrix::from_rows(&rows).unwrap().scaled(1e-3);
    c.bench_function("solve_mixed_6x6", |b| {
        b.iter(|| solve_mixed(black_box(&a), 1e-9).unwrap())
    });
}

criterion_group!(benches, subset_sums, fusion_rules, game_solver);
criterion_main!(benches);
