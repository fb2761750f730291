//! Default rayon pool against a one-thread pool on the hot paths.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use locc_disc::localrange::min_abs_local;
use locc_disc::matrixcore::{random_unitary, C64, CMatrix, PartitionedOperator};
use locc_disc::oracle::{grid_min_local, GridSpec, MAX_BUDGET};
use locc_disc::schemes::plan_discrimination;
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    vec![
        ("default", ThreadPoolBuilder::new().build().unwrap()),
        ("one-thread", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn worked_pair() -> (PartitionedOperator, PartitionedOperator) {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let id = PartitionedOperator::new(CMatrix::identity(4), vec![2, 2]).unwrap();
    let d = CMatrix::from_diag(&[one, i, i, -one]);
    (id, PartitionedOperator::new(d, vec![2, 2]).unwrap())
}

fn bench(c: &mut Criterion) {
    let (u1, u2) = worked_pair();
    let qutrits = PartitionedOperator::new(random_unitary(9, 3), vec![3, 3]).unwrap();
    let mut group = c.benchmark_group("planners");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("min_abs_local_3x3", name), |b| {
            b.iter(|| pool.install(|| min_abs_local(&qutrits, 7, 32).unwrap()))
        });
        group.bench_function(BenchmarkId::new("plan_worked_pair", name), |b| {
            b.iter(|| pool.install(|| plan_discrimination(&u1, &u2, 0).unwrap()))
        });
        let spec = GridSpec::new(60, MAX_BUDGET).unwrap();
        group.bench_function(BenchmarkId::new("grid_oracle_2x2", name), |b| {
            b.iter(|| pool.install(|| grid_min_local(&u2, &spec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
