use thz_core::analytics::{manley_rowe_residual, photon_flux};
use thz_core::config::{preset_config, RunConfig};
use thz_core::units::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use thz_core::{march_cell, simulate, Error, SchemeKind, C64};

/// ch3f-seq on a coarse grid that still passes the resolution and stability guards.
fn small() -> RunConfig {
    let mut c = preset_config("ch3f-seq").unwrap();
    c.grid.nz = 50;
    c.grid.nt = 2000;
    c
}

fn transparent(mut c: RunConfig) -> RunConfig {
    c.medium.density_per_cm3 = 1.0;
    c
}

#[test]
fn loss_only_decays_exponentially() {
    let mut c = transparent(small());
    c.medium.loss_per_cm = [0.5; 4];
    let sim = simulate(&c).unwrap();
    let g = &sim.output.grid;
    let last = g.z.len() - 1;
    let expected = (-0.5_f64).exp();
    for a in 0..3 {
        let w0 = g.series(0, a);
        let w1 = g.series(last, a);
        let i = (0..g.nt()).max_by(|&i, &j| w0[i].norm().total_cmp(&w0[j].norm())).unwrap();
        let ratio = w1[i].norm() / w0[i].norm();
        assert!((ratio - expected).abs() < 1e-4, "field {}: {ratio}", a + 1);
    }
}

#[test]
fn empty_medium_is_identity() {
    let sim = simulate(&transparent(small())).unwrap();
    let g = &sim.output.grid;
    let last = g.z.len() - 1;
    let peak: Vec<f64> = (0..3)
        .map(|a| g.series(0, a).iter().fold(0.0_f64, |m, w| m.max(w.norm())))
        .collect();
    for (w0, w1) in g.slice(0).iter().zip(g.slice(last)) {
        for a in 0..3 {
            assert!((w1[a] - w0[a]).norm() <= 1e-9 * peak[a]);
        }
        assert!(w1[3].norm() < 1e-9 * peak[2]);
    }
}

#[test]
fn ground_state_medium_only_absorbs() {
    let mut c = small();
    c.detuning.delta1_mhz = 0.0;
    c.detuning.delta2_mhz = 0.0;
    c.scenario.pulse1.peak_rabi_per_s = 1e11;
    c.scenario.pulse2.peak_rabi_per_s = 0.0;
    c.scenario.pulse3.peak_rabi_per_s = 0.0;
    let r = simulate(&c).unwrap().report;
    assert!(r.energy_out_1 < r.energy_in_1 * (1.0 - 1e-6), "{} vs {}", r.energy_out_1, r.energy_in_1);
    assert_eq!(r.energy_out_4, 0.0);
}

#[test]
fn thz_energy_quadratic_in_coherence() {
    let mut c = small();
    c.options.frozen_coherence = true;
    c.scenario.pulse3.peak_rabi_per_s = 1e11;
    c.medium.density_per_cm3 = 1e15;
    c.medium.length_cm = 0.1;
    let energy = |rho: f64| {
        let mut c = c.clone();
        c.options.frozen_rho_bc_re = rho;
        simulate(&c).unwrap().report.energy_out_4
    };
    let ratio = energy(0.4) / energy(0.2);
    assert!((ratio - 4.0).abs() < 0.08, "{ratio}");
}

#[test]
fn unit_indices_give_zero_mismatch() {
    let sim = simulate(&small()).unwrap();
    assert_eq!(sim.output.grid.phase_mismatch, 0.0);
    assert_eq!(sim.report.phase_mismatch_l, 0.0);
}

#[test]
fn coarse_grids_rejected() {
    let mut c = small();
    c.grid.nt = 500;
    let err = march_cell(&c.resolve().unwrap().setup).unwrap_err();
    assert!(matches!(err, Error::UnderResolved(_)), "{err}");
    let mut c = small();
    c.grid.nz = 10;
    assert!(matches!(march_cell(&c.resolve().unwrap().setup), Err(Error::UnderResolved(_))));
}

#[test]
fn stability_guard_enforced() {
    let mut c = small();
    c.scenario.pulse1.peak_rabi_per_s = 1e16;
    let err = simulate(&c).err().expect("step-size error");
    assert!(matches!(err, Error::StepSize { .. }), "{err}");
}

#[test]
fn small_run_hygiene() {
    let r = simulate(&small()).unwrap().report;
    assert!(r.max_trace_drift < 1e-9);
    assert!(r.max_hermiticity_error < 1e-12);
    assert!(r.min_eigenvalue > -1e-8);
    assert!(r.peak_rho_bc <= 0.5 + 1e-9);
}

#[test]
fn lossy_run_drifts_and_signature_checked() {
    let mut c = small();
    c.medium.loss_per_cm = [0.2; 4];
    let sim = simulate(&c).unwrap();
    assert!(!sim.report.mr_strict);
    assert!(sim.report.mr_residual_max_abs > 1e-3);
    let err = manley_rowe_residual(&sim.output.grid, SchemeKind::LadderLambda).unwrap_err();
    assert!(matches!(err, Error::SignatureMismatch { .. }));
}

#[test]
fn photon_flux_of_gaussian() {
    let (peak, tau, nu, dipole) = (1e12, 150e-15, 2e14, 3e-31);
    let n = 4001;
    let t0 = -1.5e-12;
    let dt = 3e-12 / (n - 1) as f64;
    let env: Vec<C64> = (0..n)
        .map(|i| {
            let x = (t0 + i as f64 * dt) / tau;
            C64::new(peak * (-2.0 * std::f64::consts::LN_2 * x * x).exp(), 0.0)
        })
        .collect();
    let integral = peak * peak * tau * (std::f64::consts::PI / (4.0 * std::f64::consts::LN_2)).sqrt();
    let exact = 2.0 * EPSILON_0 * SPEED_OF_LIGHT * HBAR * integral / (dipole * dipole * nu);
    assert!((photon_flux(&env, dt, nu, dipole) / exact - 1.0).abs() < 1e-9);
}
