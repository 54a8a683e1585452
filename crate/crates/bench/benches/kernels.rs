use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use holo_bench::{random_points, simplex_front, waveforms};
use holo_core::cnot::cnot_fidelity;
use holo_core::cost::CostModel;
use holo_core::ewm::{select, IndicatorMatrix};
use holo_core::moo::{hypervolume, non_dominated_sort};
use holo_core::pulse::PulseKind;
use holo_core::{units, ErrorPoint, TwoQubitConfig};

fn propagation(c: &mut Criterion) {
    let model = CostModel::default();
    let p = PulseKind::Sr.params();
    let prepared = model.prepare(&p).unwrap();
    c.bench_function("coherent fidelity, 4000 steps", |b| b.iter(|| black_box(prepared.coherent_fidelity(0.1, -0.1))));
    let point = ErrorPoint::new(0.1, -0.1, units::khz(3.0)).unwrap();
    c.bench_function("lindblad fidelity, 4000 steps", |b| {
        b.iter(|| black_box(model.gate_fidelity_prepared(&prepared, point).unwrap()))
    });
    c.bench_function("robustness cost j_ar", |b| b.iter(|| black_box(model.j_ar(&p).unwrap())));

    let w = waveforms(PulseKind::Sr);
    let cfg = TwoQubitConfig { steps: 2000, ..TwoQubitConfig::default() }.with_kappa(units::khz(3.0));
    let mut g = c.benchmark_group("cnot");
    g.sample_size(10);
    g.bench_function("cnot fidelity, 3x2000 steps", |b| b.iter(|| black_box(cnot_fidelity(&cfg, &w, 0.0, 0.0).unwrap())));
    g.finish();
}

fn selection(c: &mut Criterion) {
    let pts = random_points(200, 3, 1);
    c.bench_function("non-dominated sort, 200x3", |b| b.iter(|| black_box(non_dominated_sort(&pts).unwrap())));
    let front = simplex_front(100, 3, 2);
    let reference = vec![1.1; 3];
    c.bench_function("hypervolume, 100x3", |b| b.iter(|| black_box(hypervolume(&front, &reference).unwrap())));
    let m = IndicatorMatrix::unnamed(front).unwrap();
    c.bench_function("entropy weights, 100x3", |b| b.iter(|| black_box(select(&m).unwrap())));
}

criterion_group!(benches, propagation, selection);
criterion_main!(benches);
