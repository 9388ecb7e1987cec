use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use thz_core::config::preset_config;
use thz_core::quantum::StepHamiltonians;
use thz_core::{
    build_rwa_hamiltonian, march_cell, step_density_matrix, DensityMatrix, Detunings, RelaxationModel, SchemeKind,
    C64,
};

fn bloch_step(c: &mut Criterion) {
    let det = Detunings {
        delta1: 1.9e9,
        delta2: 1.9e9,
        delta3: 0.0,
    };
    let w = [1e12, 0.8e12, 1e11, 1e10].map(|x| C64::new(x, 0.0));
    let h = build_rwa_hamiltonian(SchemeKind::DoubleLambda, &det, &w).unwrap();
    let hs = StepHamiltonians::constant(h);
    let relax = RelaxationModel::from_rates(1e10, 1e10, 1.6e9);
    let rho = DensityMatrix::bc_superposition(C64::new(0.3, 0.1));
    c.bench_function("step_density_matrix", |b| {
        b.iter(|| step_density_matrix(black_box(&rho), &hs, &relax, black_box(1e-15)).unwrap())
    });
}

fn small_cell(c: &mut Criterion) {
    let mut cfg = preset_config("ch3f-seq").unwrap();
    cfg.grid.nz = 50;
    cfg.grid.nt = 2000;
    let setup = cfg.resolve().unwrap().setup;
    let mut group = c.benchmark_group("march_cell");
    group.sample_size(10);
    group.bench_function("ch3f-seq 50x2000", |b| b.iter(|| march_cell(black_box(&setup)).unwrap()));
    group.finish();
}

criterion_group!(benches, bloch_step, small_cell);
criterion_main!(benches);
