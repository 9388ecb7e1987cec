//! Envelope propagation through the cell in retarded time τ = t − z/c.
//!
//! Each z-slice integrates the density matrix over the whole τ window with
//! the local fields, then the envelopes are advanced with a Heun
//! (predictor–corrector) step of
//!
//! ```text
//! ∂Ω_α/∂z = −κ_α Ω_α + i ξ η_α ρ_α
//! ```
//!
//! where ρ_α is the coherence of the transition driven by field α,
//! `ρ[upper][lower]`. The phase mismatch δk = Σ s_α k_α is carried entirely
//! by field 4: the medium sees Ω₄e^{i s₄ δk z} and the field-4 source is
//! rotated by e^{−i s₄ δk z}.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pulses::{boundary_fields, ScenarioSpec};
use crate::quantum::{
    hamiltonian_unchecked, rk4_unchecked, DensityMatrix, Detunings, LevelScheme, RelaxationModel, SchemeKind,
    StepHamiltonians, C64, STABILITY_LIMIT,
};
use crate::units::{EPSILON_0, HBAR, SPEED_OF_LIGHT};

/// Minimum samples per FWHM of the shortest active pulse.
pub const MIN_POINTS_PER_FWHM: f64 = 40.0;
/// Minimum number of z-steps.
pub const MIN_Z_STEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec {
    /// Number density, m⁻³.
    pub density: f64,
    /// Cell length, m.
    pub length: f64,
    pub fill_factor: f64,
    /// Field losses κ_α, m⁻¹.
    pub loss: [f64; 4],
    pub refractive_index: [f64; 4],
}

impl MediumSpec {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.density > 0.0 && self.density.is_finite()) {
            errs.push("medium.N must be > 0".to_string());
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            errs.push("medium.L must be > 0".to_string());
        }
        if !(self.fill_factor > 0.0 && self.fill_factor <= 1.0) {
            errs.push("medium.fill_factor must lie in (0, 1]".to_string());
        }
        if self.loss.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
            errs.push("medium.loss must be ≥ 0".to_string());
        }
        if self.refractive_index.iter().any(|n| !(*n >= 1.0 && n.is_finite())) {
            errs.push("medium.refractive_index must be ≥ 1".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.loss.iter().all(|k| *k == 0.0)
    }
}

/// Uniform grid resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Number of z-steps; the grid carries `nz + 1` slices.
    pub nz: usize,
    pub nt: usize,
    pub tau_start: f64,
    pub tau_end: f64,
}

impl GridSpec {
    pub fn dt(&self) -> f64 {
        (self.tau_end - self.tau_start) / (self.nt - 1) as f64
    }

    pub fn tau_axis(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.nt).map(|i| self.tau_start + i as f64 * dt).collect()
    }

    pub fn z_axis(&self, length: f64) -> Vec<f64> {
        let dz = length / self.nz as f64;
        (0..=self.nz).map(|j| j as f64 * dz).collect()
    }
}

/// η_α = ν N ℘² / (2 ε₀ c ħ), rad s⁻¹ m⁻¹ per unit coherence.
pub fn coupling_constant(nu: f64, density: f64, dipole: f64) -> f64 {
    nu * density * dipole * dipole / (2.0 * EPSILON_0 * SPEED_OF_LIGHT * HBAR)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConstants(pub [f64; 4]);

impl CouplingConstants {
    pub fn new(carriers: &[f64; 4], density: f64, dipoles: &[f64; 4]) -> Self {
        Self([0, 1, 2, 3].map(|a| coupling_constant(carriers[a], density, dipoles[a])))
    }
}

/// Transverse mode used for the filling factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveguideMode {
    Uniform,
    Te { n: u32, m: u32, width: f64, height: f64 },
}

/// ξ = ∫F_nm dx dy / S for the transverse amplitude profile F_nm.
pub fn fill_factor(mode: Option<WaveguideMode>) -> Result<f64> {
    match mode {
        None | Some(WaveguideMode::Uniform) => Ok(1.0),
        Some(WaveguideMode::Te { n, m, width, height }) => {
            if !(width > 0.0 && height > 0.0) {
                return Err(Error::Config("waveguide dimensions must be > 0".into()));
            }
            // TE_n0 / TE_0m: one sinusoidal lobe pattern across one dimension,
            // mean of |sin| over whole lobes is 2/π.
            match (n, m) {
                (n, 0) | (0, n) if n > 0 => Ok(2.0 / PI),
                _ => Err(Error::UnsupportedMode {
                    n,
                    m,
                    supported: "TE_n0, TE_0m (n ≥ 1), uniform".into(),
                }),
            }
        }
    }
}

/// Complex Rabi envelopes Ω₁..Ω₄ on the (z, τ) grid, z-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub kind: SchemeKind,
    pub z: Vec<f64>,
    pub tau: Vec<f64>,
    pub fields: Vec<[C64; 4]>,
    /// Carriers ν_α, rad/s.
    pub carriers: [f64; 4],
    /// k_α = n_α ν_α / c, rad/m.
    pub wavenumbers: [f64; 4],
    pub dipoles: [f64; 4],
    /// δk = Σ s_α k_α, rad/m.
    pub phase_mismatch: f64,
}

impl FieldGrid {
    pub fn nt(&self) -> usize {
        self.tau.len()
    }

    pub fn slice(&self, iz: usize) -> &[[C64; 4]] {
        let nt = self.nt();
        &self.fields[iz * nt..(iz + 1) * nt]
    }

    pub fn series(&self, iz: usize, field: usize) -> Vec<C64> {
        self.slice(iz).iter().map(|f| f[field]).collect()
    }

    pub fn dt(&self) -> f64 {
        if self.tau.len() > 1 {
            self.tau[1] - self.tau[0]
        } else {
            0.0
        }
    }

    pub fn validate_axes(&self) -> Result<()> {
        let uniform = |v: &[f64]| -> bool {
            if v.len() < 2 {
                return false;
            }
            let h = v[1] - v[0];
            h > 0.0 && v.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
        };
        if !uniform(&self.z) || !uniform(&self.tau) {
            return Err(Error::Config("grid axes must be strictly increasing and uniform".into()));
        }
        if self.fields.len() != self.z.len() * self.tau.len() {
            return Err(Error::Config("field array does not match grid size".into()));
        }
        Ok(())
    }
}

/// Phase mismatch from the refractive indices; exactly zero when all n_α = 1.
pub fn phase_mismatch(kind: SchemeKind, carriers: &[f64; 4], refractive_index: &[f64; 4]) -> f64 {
    let s = kind.signature();
    (0..4)
        .map(|a| s[a] * (refractive_index[a] - 1.0) * carriers[a] / SPEED_OF_LIGHT)
        .sum()
}

/// Everything a march needs.
#[derive(Debug, Clone)]
pub struct CellSetup {
    pub scheme: LevelScheme,
    pub detunings: Detunings,
    pub relaxation: RelaxationModel,
    pub medium: MediumSpec,
    pub scenario: ScenarioSpec,
    pub grid: GridSpec,
    pub initial: DensityMatrix,
    /// Clamp ρ_bc to this value, drop the optical fields and keep the probe
    /// undepleted. Used to validate against the perturbative output field.
    pub frozen_coherence: Option<C64>,
}

/// Worst-case numerical hygiene over every accepted τ-step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hygiene {
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub renormalizations: usize,
}

impl Default for Hygiene {
    fn default() -> Self {
        Self {
            max_trace_drift: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            renormalizations: 0,
        }
    }
}

impl Hygiene {
    fn merge(&mut self, other: &Hygiene) {
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
        self.renormalizations += other.renormalizations;
    }
}

#[derive(Debug, Clone)]
pub struct MarchOutput {
    pub grid: FieldGrid,
    /// ρ_bc(z, τ), z-major like the field grid.
    pub coherence: Vec<C64>,
    pub couplings: CouplingConstants,
    pub hygiene: Hygiene,
}

struct Slice {
    sources: Vec<[C64; 4]>,
    rho_bc: Vec<C64>,
    hygiene: Hygiene,
}

struct Marcher<'a> {
    setup: &'a CellSetup,
    eta: [f64; 4],
    dk: f64,
    dt: f64,
    tau: Vec<f64>,
}

/// Cubic Lagrange interpolation of the sampled fields at τ_i + θ·dt,
/// falling back to one-sided stencils at the window edges.
fn interpolate(f: &[[C64; 4]], i: usize, theta: f64) -> [C64; 4] {
    let n = f.len();
    if theta == 0.0 {
        return f[i];
    }
    if theta == 1.0 {
        return f[i + 1];
    }
    // stencil start j0 and the position of τ relative to it, in steps
    let (j0, x) = if n < 4 {
        (i, theta)
    } else if i == 0 {
        (0, theta)
    } else if i + 2 >= n {
        (n - 4, (i - (n - 4)) as f64 + theta)
    } else {
        (i - 1, 1.0 + theta)
    };
    let m = n.min(4);
    let mut out = [C64::default(); 4];
    for k in 0..m {
        let mut wk = 1.0;
        for j in 0..m {
            if j != k {
                wk *= (x - j as f64) / (k as f64 - j as f64);
            }
        }
        for a in 0..4 {
            out[a] += f[j0 + k][a] * wk;
        }
    }
    out
}

fn midpoint(f: &[[C64; 4]], i: usize) -> [C64; 4] {
    interpolate(f, i, 0.5)
}

/// Largest dt·rate used for a single Bloch sub-step. Classical RK4 does
/// not preserve positivity exactly; at this step size the accumulated
/// eigenvalue error over a strong optical pulse stays below 1e-9.
pub const BLOCH_SUBSTEP_RATE: f64 = 0.02;

/// Cap on sub-steps per grid interval.
const MAX_SUBSTEPS: usize = 256;

impl Marcher<'_> {
    fn local(&self, w: &[C64; 4], z: f64) -> [C64; 4] {
        let s4 = self.setup.scheme.kind.signature()[3];
        let mut out = *w;
        if self.dk != 0.0 {
            out[3] *= C64::from_polar(1.0, s4 * self.dk * z);
        }
        out
    }

    /// Number of RK4 sub-steps for the interval [τ_i, τ_{i+1}].
    fn substeps(&self, fields: &[[C64; 4]], i: usize, z: f64) -> usize {
        let det = &self.setup.detunings;
        let kind = self.setup.scheme.kind;
        let h = StepHamiltonians {
            start: hamiltonian_unchecked(kind, det, &self.local(&fields[i], z)),
            mid: hamiltonian_unchecked(kind, det, &self.local(&midpoint(fields, i), z)),
            end: hamiltonian_unchecked(kind, det, &self.local(&fields[i + 1], z)),
        };
        let rate = h.max_rate().max(self.setup.relaxation.max_rate());
        ((rate * self.dt / BLOCH_SUBSTEP_RATE).ceil() as usize).clamp(1, MAX_SUBSTEPS)
    }

    /// Integrates the density matrix across the τ window at position `z`.
    fn slice(&self, iz: usize, z: f64, fields: &[[C64; 4]], measure: bool) -> Result<Slice> {
        let setup = self.setup;
        let kind = setup.scheme.kind;
        let det = &setup.detunings;
        let relax = &setup.relaxation;
        let nt = fields.len();

        let max_field = fields
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0_f64, |m, w| m.max(w.norm()));
        let max_det = det
            .delta1
            .abs()
            .max(det.two_photon().abs())
            .max(det.level_d(kind).abs());
        let max_relax = relax.dephasing.iter().flatten().fold(relax.decay_a.max(relax.decay_d), |m, g| m.max(*g));
        let product = self.dt * max_field.max(max_det).max(max_relax);
        if product >= STABILITY_LIMIT {
            return Err(Error::StepSize { dt: self.dt, product });
        }

        let s4 = kind.signature()[3];
        let src_phase = C64::from_polar(1.0, -s4 * self.dk * z);
        let xi = setup.medium.fill_factor;
        let mut rho = setup.initial;
        let mut sources = Vec::with_capacity(nt);
        let mut rho_bc = Vec::with_capacity(nt);
        let mut hygiene = Hygiene::default();

        for i in 0..nt {
            if !rho.is_finite() {
                return Err(Error::NonFinite { iz, it: i });
            }
            let mut src = [C64::default(); 4];
            for (a, s) in src.iter_mut().enumerate() {
                let (u, l) = kind.transition(a);
                let mut drive = C64::new(0.0, xi * self.eta[a]) * rho.0[(u.idx(), l.idx())];
                if a == 3 {
                    drive *= src_phase;
                }
                *s = fields[i][a] * -setup.medium.loss[a] + drive;
            }
            if setup.frozen_coherence.is_some() {
                src[0] = C64::default();
                src[1] = C64::default();
                src[2] = C64::default();
            }
            sources.push(src);
            rho_bc.push(rho.rho_bc());
            if measure {
                hygiene.min_eigenvalue = hygiene.min_eigenvalue.min(rho.min_eigenvalue());
            }

            if i + 1 == nt {
                break;
            }
            let sub = self.substeps(fields, i, z);
            let h_dt = self.dt / sub as f64;
            let mut next = rho;
            for j in 0..sub {
                let th = |q: f64| (j as f64 + q) / sub as f64;
                let at = |q: f64| hamiltonian_unchecked(kind, det, &self.local(&interpolate(fields, i, th(q)), z));
                let h = StepHamiltonians {
                    start: at(0.0),
                    mid: at(0.5),
                    end: at(1.0),
                };
                let (stepped, diag) = rk4_unchecked(&next, &h, relax, h_dt);
                hygiene.max_trace_drift = hygiene.max_trace_drift.max(diag.trace_drift);
                hygiene.max_hermiticity_error = hygiene.max_hermiticity_error.max(diag.hermiticity_error);
                hygiene.renormalizations += usize::from(diag.renormalized);
                next = stepped;
            }
            if let Some(clamp) = setup.frozen_coherence {
                next.0[(1, 2)] = clamp;
                next.0[(2, 1)] = clamp.conj();
            }
            rho = next;
        }
        if sources.iter().flatten().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            let it = sources
                .iter()
                .position(|s| s.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())))
                .unwrap_or(0);
            return Err(Error::NonFinite { iz, it });
        }
        Ok(Slice {
            sources,
            rho_bc,
            hygiene,
        })
    }
}

fn check_resolution(setup: &CellSetup) -> Result<()> {
    let g = &setup.grid;
    let mut problems = Vec::new();
    if g.nz < MIN_Z_STEPS {
        problems.push(format!("nz = {} < {MIN_Z_STEPS}", g.nz));
    }
    if g.nt < 4 || !(g.tau_end > g.tau_start) {
        problems.push("need nt ≥ 4 and tau_end > tau_start".to_string());
    } else if let Some(shortest) = setup.scenario.shortest_duration() {
        let window = g.tau_end - g.tau_start;
        let required = (MIN_POINTS_PER_FWHM * window / shortest).ceil() as usize + 1;
        if g.nt < required {
            problems.push(format!(
                "nt = {} gives {:.1} points per FWHM of the shortest pulse; need nt ≥ {required}",
                g.nt,
                shortest / g.dt()
            ));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::UnderResolved(problems.join("; ")))
    }
}

/// Marches all four envelopes from z = 0 to z = L.
pub fn march_cell(setup: &CellSetup) -> Result<MarchOutput> {
    setup.scheme.validate()?;
    setup.relaxation.validate()?;
    setup.medium.validate()?;
    setup.scenario.validate()?;
    check_resolution(setup)?;

    let kind = setup.scheme.kind;
    let carriers = setup.scheme.carriers(&setup.detunings);
    let couplings = CouplingConstants::new(&carriers, setup.medium.density, &setup.scheme.dipoles);
    let dk = phase_mismatch(kind, &carriers, &setup.medium.refractive_index);
    let tau = setup.grid.tau_axis();
    let z = setup.grid.z_axis(setup.medium.length);
    let nt = tau.len();
    let dz = setup.medium.length / setup.grid.nz as f64;

    let marcher = Marcher {
        setup,
        eta: couplings.0,
        dk,
        dt: setup.grid.dt(),
        tau,
    };

    let mut current: Vec<[C64; 4]> = marcher
        .tau
        .iter()
        .map(|t| {
            let mut w = boundary_fields(&setup.scenario, *t);
            if setup.frozen_coherence.is_some() {
                w[0] = C64::default();
                w[1] = C64::default();
            }
            w
        })
        .collect();

    let mut fields = Vec::with_capacity(z.len() * nt);
    let mut coherence = Vec::with_capacity(z.len() * nt);
    let mut hygiene = Hygiene::default();

    let mut here = marcher.slice(0, 0.0, &current, true)?;
    fields.extend_from_slice(&current);
    coherence.extend_from_slice(&here.rho_bc);
    hygiene.merge(&here.hygiene);

    let dz_c = C64::new(dz, 0.0);
    let half_dz = C64::new(0.5 * dz, 0.0);
    for j in 0..setup.grid.nz {
        let z_next = z[j + 1];
        let predicted: Vec<[C64; 4]> = current
            .iter()
            .zip(&here.sources)
            .map(|(w, s)| [0, 1, 2, 3].map(|a| w[a] + dz_c * s[a]))
            .collect();
        let ahead = marcher.slice(j + 1, z_next, &predicted, false)?;
        let corrected: Vec<[C64; 4]> = current
            .iter()
            .zip(here.sources.iter().zip(&ahead.sources))
            .map(|(w, (s0, s1))| [0, 1, 2, 3].map(|a| w[a] + half_dz * (s0[a] + s1[a])))
            .collect();
        here = marcher.slice(j + 1, z_next, &corrected, true)?;
        current = corrected;
        fields.extend_from_slice(&current);
        coherence.extend_from_slice(&here.rho_bc);
        hygiene.merge(&here.hygiene);
    }

    let wavenumbers = [0, 1, 2, 3].map(|a| setup.medium.refractive_index[a] * carriers[a] / SPEED_OF_LIGHT);
    Ok(MarchOutput {
        grid: FieldGrid {
            kind,
            z,
            tau: marcher.tau,
            fields,
            carriers,
            wavenumbers,
            dipoles: setup.scheme.dipoles,
            phase_mismatch: dk,
        },
        coherence,
        couplings,
        hygiene,
    })
}
