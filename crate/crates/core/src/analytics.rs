//! Closed-form results and run diagnostics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{FieldGrid, MarchOutput, MediumSpec};
use crate::quantum::{SchemeKind, C64};
use crate::units::{DEBYE, DEBYE_CGS, EPSILON_0, HBAR, HBAR_CGS, SPEED_OF_LIGHT};

/// Strict Manley–Rowe threshold on the normalized residual.
pub const MANLEY_ROWE_STRICT: f64 = 1e-6;

/// Which phase-matching factor to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SincForm {
    /// sinc(δkL/2), the exact value of (1/L)|∫₀ᴸ e^{iδkz} dz|.
    #[default]
    Exact,
    /// sinc(δkL), the commonly printed form.
    Printed,
}

impl SincForm {
    pub fn factor(self, delta_kl: f64) -> f64 {
        match self {
            SincForm::Exact => sinc(0.5 * delta_kl),
            SincForm::Printed => sinc(delta_kl),
        }
    }
}

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Perturbative THz field at the cell output,
/// Ω₄ = ξ η₄ τ ρ_cb Ω₃* L · sinc(δkL/2) e^{iδkL/2}.
///
/// `interaction_time` is the effective probe duration ∫Ω₃dt / Ω₃,peak
/// over which the d–b polarization builds up.
#[allow(clippy::too_many_arguments)]
pub fn analytic_output_field(
    omega3: C64,
    rho_cb: C64,
    eta4: f64,
    length: f64,
    delta_k: f64,
    fill_factor: f64,
    interaction_time: f64,
    form: SincForm,
) -> C64 {
    let dkl = delta_k * length;
    let phase = match form {
        SincForm::Exact => C64::from_polar(1.0, 0.5 * dkl),
        SincForm::Printed => C64::new(1.0, 0.0),
    };
    rho_cb * omega3.conj() * (fill_factor * eta4 * interaction_time * length * form.factor(dkl)) * phase
}

/// Inputs to the conversion-efficiency estimate, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyInputs {
    pub dipole_v: f64,
    pub dipole_j: f64,
    pub density: f64,
    pub rho_bc: f64,
    pub tau: f64,
    pub length: f64,
    pub lambda: f64,
    pub delta_kl: f64,
    pub fill_factor: f64,
}

/// ε = ξ² sinc²(·) (4π² ℘_v ℘_j N ρ_bc τ L / (λħ))², evaluated in
/// Gaussian units after converting the SI inputs.
pub fn efficiency_formula(p: &EfficiencyInputs, form: SincForm) -> f64 {
    let pv = p.dipole_v / DEBYE * DEBYE_CGS;
    let pj = p.dipole_j / DEBYE * DEBYE_CGS;
    let n = p.density * 1e-6;
    let l = p.length * 1e2;
    let lambda = p.lambda * 1e2;
    let amp = 4.0 * PI * PI * pv * pj * n * p.rho_bc * p.tau * l / (lambda * HBAR_CGS);
    let s = form.factor(p.delta_kl);
    p.fill_factor * p.fill_factor * s * s * amp * amp
}

fn trapezoid(values: impl ExactSizeIterator<Item = f64>, dt: f64) -> f64 {
    let n = values.len();
    values
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == n { 0.5 * v } else { v })
        .sum::<f64>()
        * dt
}

/// Photons per unit area carried by an envelope sampled with spacing `dt`:
/// n = 2ε₀cħ ∫|Ω|² dτ / (℘² ν).
pub fn photon_flux(envelope: &[C64], dt: f64, carrier: f64, dipole: f64) -> f64 {
    let integral = trapezoid(envelope.iter().map(|w| w.norm_sqr()), dt);
    2.0 * EPSILON_0 * SPEED_OF_LIGHT * HBAR * integral / (dipole * dipole * carrier)
}

/// Photon fluxes of all four fields at every z-slice.
pub fn photon_flux_profile(grid: &FieldGrid) -> Vec<[f64; 4]> {
    let dt = grid.dt();
    (0..grid.z.len())
        .map(|iz| [0, 1, 2, 3].map(|a| photon_flux(&grid.series(iz, a), dt, grid.carriers[a], grid.dipoles[a])))
        .collect()
}

/// [Σ s_α n_α(z) − Σ s_α n_α(0)] / max_α n_α(0) along the cell.
pub fn manley_rowe_residual(grid: &FieldGrid, kind: SchemeKind) -> Result<Vec<f64>> {
    if grid.kind != kind {
        return Err(Error::SignatureMismatch {
            grid: grid.kind.to_string(),
            requested: kind.to_string(),
        });
    }
    Ok(residual_from_fluxes(&photon_flux_profile(grid), kind))
}

pub fn residual_from_fluxes(fluxes: &[[f64; 4]], kind: SchemeKind) -> Vec<f64> {
    let s = kind.signature();
    let signed = |n: &[f64; 4]| -> f64 { (0..4).map(|a| s[a] * n[a]).sum() };
    let Some(first) = fluxes.first() else {
        return Vec::new();
    };
    let reference = signed(first);
    let scale = first.iter().fold(0.0_f64, |m, v| m.max(*v));
    fluxes
        .iter()
        .map(|n| {
            if scale > 0.0 {
                (signed(n) - reference) / scale
            } else {
                0.0
            }
        })
        .collect()
}

/// Upper bound on the output pulse energy when every input photon is
/// converted one-to-one: E_in · λ_in / λ_out.
pub fn manley_rowe_energy_bound(input_energy: f64, lambda_in: f64, lambda_out: f64) -> f64 {
    input_energy * lambda_in / lambda_out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMetrics {
    /// Pulse energy through `beam_area`, J.
    pub energy: f64,
    /// FWHM of |Ω|², s. `None` for an identically zero envelope.
    pub fwhm: Option<f64>,
    /// W/m².
    pub peak_intensity: f64,
}

/// Intensity of a field with Rabi frequency `omega`: ½ε₀c|E|² with the
/// real-field amplitude E = 2ħ|Ω|/℘.
pub fn intensity(omega: C64, dipole: f64) -> f64 {
    let e = 2.0 * HBAR * omega.norm() / dipole;
    0.5 * EPSILON_0 * SPEED_OF_LIGHT * e * e
}

/// FWHM of |Ω|², linear interpolation between samples.
pub fn fwhm(envelope: &[C64], dt: f64) -> Option<f64> {
    let power: Vec<f64> = envelope.iter().map(|w| w.norm_sqr()).collect();
    let (imax, &pmax) = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))?;
    if !(pmax > 0.0) {
        return None;
    }
    let half = 0.5 * pmax;
    let crossing = |i0: usize, i1: usize| -> f64 {
        let (p0, p1) = (power[i0], power[i1]);
        i0 as f64 + (half - p0) / (p1 - p0) * (i1 as f64 - i0 as f64)
    };
    let left = (0..imax)
        .rev()
        .find(|&i| power[i] < half)
        .map(|i| crossing(i, i + 1))
        .unwrap_or(0.0);
    let right = (imax + 1..power.len())
        .find(|&i| power[i] < half)
        .map(|i| crossing(i - 1, i))
        .unwrap_or((power.len() - 1) as f64);
    Some((right - left) * dt)
}

pub fn pulse_metrics(envelope: &[C64], dt: f64, dipole: f64, beam_area: f64) -> PulseMetrics {
    let energy = beam_area * trapezoid(envelope.iter().map(|w| intensity(*w, dipole)), dt);
    let peak = envelope.iter().fold(0.0_f64, |m, w| m.max(intensity(*w, dipole)));
    PulseMetrics {
        energy,
        fwhm: fwhm(envelope, dt),
        peak_intensity: peak,
    }
}

/// Summary of one run. Energies in J, durations in s.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub scheme: String,
    pub frozen_coherence: bool,
    pub energy_in_1: f64,
    pub energy_in_2: f64,
    pub energy_in_3: f64,
    pub energy_in_4: f64,
    pub energy_out_1: f64,
    pub energy_out_2: f64,
    pub energy_out_3: f64,
    pub energy_out_4: f64,
    /// FWHM of the generated THz pulse at the output; 0 when absent.
    pub thz_fwhm: f64,
    /// FWHM of the IR probe at the input; 0 when absent.
    pub probe_fwhm: f64,
    pub peak_rho_bc: f64,
    /// E₄(L) / E₃(0).
    pub efficiency: f64,
    /// Peak I₄(L) / peak I₃(0).
    pub intensity_ratio: f64,
    /// Signed Manley–Rowe residual at z = L.
    pub mr_residual: f64,
    pub mr_residual_max_abs: f64,
    pub mr_strict: bool,
    pub phase_mismatch_l: f64,
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl RunReport {
    pub fn build(out: &MarchOutput, medium: &MediumSpec, beam_area: f64, frozen: bool) -> Result<Self> {
        let grid = &out.grid;
        let dt = grid.dt();
        let last = grid.z.len() - 1;
        let metrics = |iz: usize, a: usize| pulse_metrics(&grid.series(iz, a), dt, grid.dipoles[a], beam_area);
        let inp = [0, 1, 2, 3].map(|a| metrics(0, a));
        let outp = [0, 1, 2, 3].map(|a| metrics(last, a));
        let residual = manley_rowe_residual(grid, grid.kind)?;
        let mr_max = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        Ok(Self {
            scheme: grid.kind.to_string(),
            frozen_coherence: frozen,
            energy_in_1: inp[0].energy,
            energy_in_2: inp[1].energy,
            energy_in_3: inp[2].energy,
            energy_in_4: inp[3].energy,
            energy_out_1: outp[0].energy,
            energy_out_2: outp[1].energy,
            energy_out_3: outp[2].energy,
            energy_out_4: outp[3].energy,
            thz_fwhm: outp[3].fwhm.unwrap_or(0.0),
            probe_fwhm: inp[2].fwhm.unwrap_or(0.0),
            peak_rho_bc: out.coherence.iter().fold(0.0_f64, |m, r| m.max(r.norm())),
            efficiency: ratio(outp[3].energy, inp[2].energy),
            intensity_ratio: ratio(outp[3].peak_intensity, inp[2].peak_intensity),
            mr_residual: residual.last().copied().unwrap_or(0.0),
            mr_residual_max_abs: mr_max,
            mr_strict: medium.is_lossless(),
            phase_mismatch_l: grid.phase_mismatch * medium.length,
            max_trace_drift: out.hygiene.max_trace_drift,
            max_hermiticity_error: out.hygiene.max_hermiticity_error,
            min_eigenvalue: out.hygiene.min_eigenvalue,
        })
    }

    /// Residual check: strict runs must stay within [`MANLEY_ROWE_STRICT`].
    pub fn mr_passes(&self) -> bool {
        self.mr_residual_max_abs < MANLEY_ROWE_STRICT
    }
}
