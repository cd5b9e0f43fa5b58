use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rcc_core::experiment::{run_benchmark, BenchmarkConfig, LambdaGrid, Method, Scenario};
use rcc_core::{
    build_edge_set, generate, solve, Execution, NoiseKind, ScenarioConfig, SolverConfig,
    WeightScheme,
};

fn admm_iterations(c: &mut Criterion) {
    let mut group = c.benchmark_group("admm_50_iterations");
    group.sample_size(10);
    for (n, p) in [(50, 20), (200, 20), (400, 50)] {
        let data = generate(&ScenarioConfig {
            n,
            p,
            noise: NoiseKind::StudentT2,
            contam_frac: 0.06,
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        let edges = build_edge_set(&data.x, &WeightScheme::robust(0.01, 5.0)).unwrap();
        for (label, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            let cfg = SolverConfig::new(1.0, 3.0)
                .with_tol(0.0)
                .with_max_iter(50)
                .with_execution(exec);
            group.bench_with_input(
                BenchmarkId::new(label, format!("n{n}_p{p}")),
                &cfg,
                |b, cfg| b.iter(|| black_box(solve(&data.x, &edges, cfg).unwrap())),
            );
        }
    }
    group.finish();
}

fn replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("benchmark_replications");
    group.sample_size(10);
    for (label, parallel) in [("sequential", false), ("parallel", true)] {
        let cfg = BenchmarkConfig {
            reps: 4,
            n: 30,
            p: 10,
            grid: LambdaGrid::log(0.1, 100.0, 10).unwrap(),
            scenarios: vec![Scenario::new(NoiseKind::Gaussian, 0.1)],
            methods: vec![Method::HuberRobust],
            parallel,
            ..Default::default()
        };
        group.bench_function(label, |b| {
            b.iter(|| black_box(run_benchmark(&cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, admm_iterations, replications);
criterion_main!(benches);
