use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use neqdmft_core::compiler::compile_trotter_step;
use neqdmft_core::fermi::{greens_ed, HybridizationSet, SiamParams};
use neqdmft_core::interferometry::{measure_impurity_green, CircuitSolverConfig};
use neqdmft_core::lindblad::{fit_hybridizations_noisy, BathModel, FitOptions, LindbladBathParams};
use neqdmft_core::qubit::{Axis, GateSpec, Statevector};
use neqdmft_core::{CMatrix, TimeGrid, C64};

fn spread_state(n_qubits: usize) -> Statevector {
    let dim = 1 << n_qubits;
    let amps: Vec<C64> = (0..dim).map(|i| C64::from_polar(1.0, 0.37 * i as f64)).collect();
    let norm = (dim as f64).sqrt();
    Statevector::from_amplitudes(amps.into_iter().map(|z| z / norm).collect()).unwrap()
}

fn couplings(l: usize, len: usize) -> CMatrix {
    CMatrix::from_fn(l, len, |p, n| {
        if n == 0 {
            C64::new(0.0, 0.0)
        } else {
            C64::from_polar(0.6 - 0.1 * p as f64, 0.3 * n as f64 + p as f64)
        }
    })
}

fn statevector_gates(c: &mut Criterion) {
    let mut group = c.benchmark_group("gate");
    for n in [7, 11, 15] {
        let rot = GateSpec::rotation(Axis::X, n / 2, 0.3);
        let ms = GateSpec::ms(1, n - 1, 0.2, 0.5);
        group.bench_with_input(BenchmarkId::new("rotation", n), &n, |b, &n| {
            let mut s = spread_state(n);
            b.iter(|| s.apply(black_box(&rot)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("ms", n), &n, |b, &n| {
            let mut s = spread_state(n);
            b.iter(|| s.apply(black_box(&ms)).unwrap())
        });
    }
    group.finish();
}

fn trotter_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("trotter_step");
    for l in [1, 2, 3] {
        let params = SiamParams::new(2.0, HybridizationSet::from_occupied(&couplings(l, 2)));
        let step = compile_trotter_step(&params, 1, 0.04).unwrap();
        // probe qubit plus impurity and bath modes
        let n = 2 + 4 * l + 1;
        group.bench_with_input(BenchmarkId::from_parameter(2 * l), &l, |b, _| {
            let mut s = spread_state(n);
            let shifted = step.shifted(1);
            b.iter(|| s.apply_all(shifted.gates()).unwrap())
        });
    }
    group.finish();
}

fn impurity_greens(c: &mut Criterion) {
    let grid = TimeGrid::covering(0.04, 0.4).unwrap();
    let params = SiamParams::new(2.0, HybridizationSet::from_occupied(&couplings(1, grid.len())));
    let mut group = c.benchmark_group("greens");
    group.sample_size(10);
    group.bench_function("ed", |b| b.iter(|| greens_ed(black_box(&params), &grid).unwrap()));
    group.bench_function("circuit", |b| {
        b.iter(|| measure_impurity_green(black_box(&params), &grid, &CircuitSolverConfig::default()).unwrap())
    });
    group.finish();
}

fn dissipative_fit(c: &mut Criterion) {
    let grid = TimeGrid::new(0.1, 12).unwrap();
    let bath = LindbladBathParams::symmetric(0.2).unwrap();
    let model = BathModel::dissipative(&bath, &grid);
    let truth = couplings(3, grid.len());
    let target = model.represent_all(&truth);
    let start = truth.map(|z| z * 0.8);
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    group.bench_function("dissipative_l3", |b| {
        b.iter(|| fit_hybridizations_noisy(black_box(&target), &model, 0.0, &start, &grid, &FitOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, statevector_gates, trotter_step, impurity_greens, dissipative_fit);
criterion_main!(benches);
