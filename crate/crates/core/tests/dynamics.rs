//! Density-matrix integration against closed-form solutions.

use proptest::prelude::*;
use thz_core::quantum::{Mat4, StepHamiltonians};
use thz_core::{
    build_rwa_hamiltonian, dark_state_coherence, step_density_matrix, DensityMatrix, Detunings, Level,
    RelaxationModel, SchemeKind, C64,
};

fn resonant() -> Detunings {
    Detunings {
        delta1: 0.0,
        delta2: 0.0,
        delta3: 0.0,
    }
}

fn h_of(w: [f64; 4]) -> Mat4 {
    build_rwa_hamiltonian(SchemeKind::DoubleLambda, &resonant(), &w.map(|x| C64::new(x, 0.0))).unwrap()
}

fn evolve(rho: DensityMatrix, h: Mat4, relax: &RelaxationModel, t: f64, steps: usize) -> DensityMatrix {
    let dt = t / steps as f64;
    let hs = StepHamiltonians::constant(h);
    (0..steps).fold(rho, |r, _| step_density_matrix(&r, &hs, relax, dt).unwrap().0)
}

#[test]
fn two_level_rabi_matches_sin_squared() {
    let x = 1.0e12;
    let h = h_of([x, 0.0, 0.0, 0.0]);
    let relax = RelaxationModel::none();
    let dt = 1e-15;
    let hs = StepHamiltonians::constant(h);
    let mut rho = DensityMatrix::pure(Level::B);
    let mut worst = 0.0_f64;
    for n in 1..=4000 {
        rho = step_density_matrix(&rho, &hs, &relax, dt).unwrap().0;
        let t = n as f64 * dt;
        let exact = (x * t).sin().powi(2);
        worst = worst.max((rho.get(Level::A, Level::A).re - exact).abs());
    }
    assert!(worst < 1e-8, "max deviation {worst:e}");
}

#[test]
fn richardson_fourth_order() {
    let x = 1.0e12;
    let h = h_of([x, 0.7 * x, 0.0, 0.0]);
    let relax = RelaxationModel::from_rates(0.0, 0.0, 0.05 * x);
    let t = 2.0e-12;
    let rho0 = DensityMatrix::pure(Level::B);
    let reference = evolve(rho0, h, &relax, t, 8000);
    let err = |steps| (evolve(rho0, h, &relax, t, steps).0 - reference.0).norm();
    let ratio = err(100) / err(200);
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn free_decay_of_optical_coherence() {
    let gamma = 2e11;
    let relax = RelaxationModel::from_rates(0.0, 0.0, gamma);
    let mut m = Mat4::zeros();
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        m[(i, j)] = C64::new(0.5, 0.0);
    }
    let t = 10e-12;
    let rho = evolve(DensityMatrix(m), Mat4::zeros(), &relax, t, 1000);
    let exact = 0.5 * (-gamma * t).exp();
    assert!((rho.get(Level::A, Level::B).norm() - exact).abs() < 1e-6);
}

#[test]
fn unitary_limit_keeps_spectrum() {
    let x = 5e11;
    let h = h_of([x, 0.4 * x, 0.3 * x, 0.2 * x]);
    let relax = RelaxationModel::none();
    let mut m = Mat4::zeros();
    m[(1, 1)] = C64::new(0.7, 0.0);
    m[(2, 2)] = C64::new(0.3, 0.0);
    m[(1, 2)] = C64::new(0.2, 0.1);
    m[(2, 1)] = C64::new(0.2, -0.1);
    let rho0 = DensityMatrix(m);
    let spectrum = |r: &DensityMatrix| {
        let mut e: Vec<f64> = r.0.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    };
    let before = spectrum(&rho0);
    let period = std::f64::consts::PI / x;
    let after = spectrum(&evolve(rho0, h, &relax, period, 2000));
    for (a, b) in before.iter().zip(&after) {
        assert!((a - b).abs() < 1e-8, "{before:?} vs {after:?}");
    }
}

#[test]
fn no_drive_no_relaxation_is_constant() {
    let rho0 = DensityMatrix::bc_superposition(C64::new(0.3, -0.2));
    let rho = evolve(rho0, Mat4::zeros(), &RelaxationModel::none(), 1e-12, 100);
    assert!((rho.0 - rho0.0).norm() < 1e-15);
}

#[test]
fn repopulation_conserves_trace() {
    let x = 1e12;
    let h = h_of([x, x, 0.5 * x, 0.0]);
    let relax = RelaxationModel::from_rates(3e11, 2e11, 1e11);
    let rho = evolve(DensityMatrix::pure(Level::B), h, &relax, 5e-12, 5000);
    assert!((rho.trace().re - 1.0).abs() < 1e-9);
    assert!(rho.min_eigenvalue() > -1e-8);
}

/// Counter-intuitive Gaussian pair at z = 0 without propagation.
#[test]
fn stirap_tracks_dark_state() {
    let tau = 150e-15;
    let peak = 3e14;
    let g = |t: f64, c: f64| peak * (-2.0 * std::f64::consts::LN_2 * ((t - c) / tau).powi(2)).exp();
    let det = Detunings {
        delta1: 2.0 * std::f64::consts::PI * 300e6,
        delta2: 2.0 * std::f64::consts::PI * 300e6,
        delta3: 0.0,
    };
    let relax = RelaxationModel::from_rates(0.0, 0.0, 2.0 * std::f64::consts::PI * 250e6);
    let h = |t: f64| {
        let w = [C64::new(g(t, tau), 0.0), C64::new(g(t, 0.0), 0.0), C64::default(), C64::default()];
        build_rwa_hamiltonian(SchemeKind::DoubleLambda, &det, &w).unwrap()
    };
    let dt = 0.02e-15;
    let mut rho = DensityMatrix::pure(Level::B);
    let mut t = -5.0 * tau;
    let mut worst = 0.0_f64;
    let mut peak_rho = 0.0_f64;
    while t < 6.0 * tau {
        let hs = StepHamiltonians {
            start: h(t),
            mid: h(t + 0.5 * dt),
            end: h(t + dt),
        };
        rho = step_density_matrix(&rho, &hs, &relax, dt).unwrap().0;
        t += dt;
        peak_rho = peak_rho.max(rho.rho_bc().norm());
        if g(t, tau) > 0.5 * peak && g(t, 0.0) > 0.5 * peak {
            let dark = dark_state_coherence(C64::new(g(t, tau), 0.0), C64::new(g(t, 0.0), 0.0)).unwrap();
            worst = worst.max((rho.rho_bc() - dark).norm() / dark.norm());
        }
    }
    assert!(worst < 0.05, "dark-state deviation {worst}");
    assert!(peak_rho <= 0.5 + 1e-9 && peak_rho > 0.45, "{peak_rho}");
}

proptest! {
    #[test]
    fn step_preserves_hermiticity_and_trace(
        w in proptest::array::uniform4(-1e12f64..1e12),
        g in 0.0f64..1e11,
        re in -0.4f64..0.4,
        im in -0.25f64..0.25,
    ) {
        let h = h_of(w);
        let relax = RelaxationModel::from_rates(g, 0.5 * g, g);
        let rho = evolve(DensityMatrix::bc_superposition(C64::new(re, im)), h, &relax, 1e-13, 200);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(rho.min_eigenvalue() > -1e-8);
    }
}
