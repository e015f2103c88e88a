//! Compares the feature-gated parallel seed fan-out against the always
//! sequential path on identical workloads. Run with `cargo bench`; with
//! `--no-default-features` the "parallel" series measures the sequential
//! fallback, which is useful for quantifying rayon overhead on small runs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use psgd_core::engine::{run_many_map, run_psgd, StepSchedule};
use psgd_core::geometry::ConvexSet;
use psgd_core::linalg::Mat;
use psgd_core::par;
use psgd_core::problems::{NoiseSpec, Objective, Problem};
use psgd_core::seeds;

fn workload() -> (Problem, StepSchedule, Vec<f64>) {
    let set = ConvexSet::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let mut p = Mat::zeros(2, 2);
    p.set(0, 0, 0.2);
    p.set(1, 1, 0.2);
    let objective = Objective::CosineQuadratic {
        p,
        q: vec![0.05, -0.03],
        amplitude: 0.15,
        frequency: std::f64::consts::PI,
    };
    let problem =
        Problem::additive(set, objective, NoiseSpec::Gaussian { sigma_hat: 0.5 }).unwrap();
    (problem, StepSchedule::Constant { alpha: 0.01 }, vec![0.0, 0.0])
}

fn bench_fanout(c: &mut Criterion) {
    let (problem, schedule, x0) = workload();
    let steps = 2_000;
    let mut group = c.benchmark_group("seed_fanout");
    group.sample_size(10);
    for &runs in &[4usize, 16] {
        group.bench_with_input(BenchmarkId::new("parallel", runs), &runs, |b, &r| {
            b.iter(|| {
                run_many_map(&problem, &schedule, steps, &x0, 42, r, |_, t| {
                    t.final_iterate()[0]
                })
                .unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("sequential", runs), &runs, |b, &r| {
            b.iter(|| {
                par::map_indexed_seq(r, |i| {
                    let seed = seeds::run_seed(42, i as u64);
                    run_psgd(&problem, &schedule, steps, &x0, seed)
                        .unwrap()
                        .final_iterate()[0]
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fanout);
criterion_main!(benches);
