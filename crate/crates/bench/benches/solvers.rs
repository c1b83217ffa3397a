use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdq_bench::{cost_matrix, ladder, variants};
use pdq_core::exact::{brute_force_optimum, exact_distance, hungarian_assign};
use pdq_core::filtration::{sample_circle, vietoris_rips_persistence};
use pdq_core::matchgraph::build_graph;
use pdq_core::qaoa::{optimize_angles, SearchStrategy};
use pdq_core::qsim::{initial_state, Simulator};

fn hungarian(c: &mut Criterion) {
    let mut group = c.benchmark_group("hungarian");
    for size in [8, 32, 128] {
        let m = cost_matrix(size);
        group.bench_with_input(BenchmarkId::from_parameter(size), &m, |b, m| {
            b.iter(|| hungarian_assign(m).unwrap())
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let d1 = ladder("a", 20, 0.0).unwrap();
    let d2 = ladder("b", 25, 0.02).unwrap();
    for v in variants().unwrap() {
        c.bench_function(&format!("exact/{}", v.name()), |b| {
            b.iter(|| exact_distance(&d1, &d2, v).unwrap())
        });
    }
}

fn simulator(c: &mut Criterion) {
    let d1 = ladder("a", 3, 0.0).unwrap();
    let d2 = ladder("b", 3, 0.02).unwrap();
    let mut group = c.benchmark_group("simulator");
    group.sample_size(20);
    for v in variants().unwrap() {
        let g = build_graph(&d1, &d2, v).unwrap();
        group.bench_function(format!("mixer/{}", v.name()), |b| {
            let mut sim = Simulator::new(&g);
            let mut st = initial_state(&g).unwrap();
            b.iter(|| sim.apply_mixer(&mut st, 0.7).unwrap())
        });
        group.bench_function(format!("brute_force/{}", v.name()), |b| {
            b.iter(|| brute_force_optimum(&g).unwrap())
        });
    }
    let g = build_graph(&ladder("a", 2, 0.0).unwrap(), &ladder("b", 2, 0.02).unwrap(), variants().unwrap()[1]).unwrap();
    group.bench_function("grid_search/dcp_2x2", |b| {
        b.iter(|| optimize_angles(&g, 1, SearchStrategy::Grid, 8, 0).unwrap())
    });
    group.finish();
}

fn rips(c: &mut Criterion) {
    let cloud = sample_circle([0.0, 0.0], 1.0, 32, 0.05, 7).unwrap();
    let mut group = c.benchmark_group("rips");
    group.sample_size(10);
    group.bench_function("circle32", |b| {
        b.iter(|| vietoris_rips_persistence(&cloud, 1, 2.5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, hungarian, exact, simulator, rips);
criterion_main!(benches);
