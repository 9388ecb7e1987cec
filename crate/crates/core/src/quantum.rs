//! Four-level density-matrix dynamics in the co-rotating frame.
//!
//! Levels are ordered `a, b, c, d` (indices 0..4). Field 1 couples a-b,
//! field 2 a-c, field 3 c-d and field 4 d-b. The frame places `b` at zero,
//! `a` at ν₁, `c` at ν₁−ν₂ and `d` at ν₁−ν₂+s₃ν₃, so with four-photon
//! closure every coupling is slowly varying. Hamiltonians are returned as
//! H/ħ in rad/s.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat4 = Matrix4<C64>;

/// Level index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
}

impl Level {
    pub const fn idx(self) -> usize {
        self as usize
    }
}

/// Coupling topology. The two schemes differ only in whether level `d`
/// sits above `c` (double-Λ, field 3 absorbed) or below it (ladder-Λ,
/// field 3 emitted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    DoubleLambda,
    LadderLambda,
}

impl SchemeKind {
    /// Signature vector `s` with `Σ sᵢνᵢ = 0`.
    pub const fn signature(self) -> [f64; 4] {
        match self {
            SchemeKind::DoubleLambda => [1.0, -1.0, 1.0, -1.0],
            SchemeKind::LadderLambda => [1.0, -1.0, -1.0, -1.0],
        }
    }

    /// `(upper, lower)` levels of the transition driven by `field` (0-based),
    /// upper meaning higher in the rotating frame.
    pub const fn transition(self, field: usize) -> (Level, Level) {
        match (self, field) {
            (_, 0) => (Level::A, Level::B),
            (_, 1) => (Level::A, Level::C),
            (SchemeKind::DoubleLambda, 2) => (Level::D, Level::C),
            (SchemeKind::LadderLambda, 2) => (Level::C, Level::D),
            _ => (Level::D, Level::B),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::DoubleLambda => "double-lambda",
            SchemeKind::LadderLambda => "ladder-lambda",
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Level energies and dipole moments of a four-level medium.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelScheme {
    pub kind: SchemeKind,
    /// Transition angular frequencies ω_ab, ω_ac, ω_dc, ω_db in rad/s.
    pub omega_ab: f64,
    pub omega_ac: f64,
    pub omega_dc: f64,
    pub omega_db: f64,
    /// Dipole moments ℘₁(ab), ℘₂(ac), ℘₃(dc), ℘₄(db) in C·m.
    pub dipoles: [f64; 4],
    /// False for level data whose dipole moments are placeholders.
    pub validated: bool,
}

impl LevelScheme {
    pub fn validate(&self) -> Result<()> {
        let freqs = [self.omega_ab, self.omega_ac, self.omega_dc, self.omega_db];
        if freqs.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Scheme(
                "transition frequencies must be positive".into(),
            ));
        }
        if self.dipoles.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Scheme("dipole moments must be positive".into()));
        }
        let s3 = self.kind.signature()[2];
        let lhs = self.omega_ab - self.omega_ac;
        let rhs = self.omega_db - s3 * self.omega_dc;
        let scale = freqs.iter().fold(0.0_f64, |m, w| m.max(*w));
        if (lhs - rhs).abs() > 1e-9 * scale {
            return Err(Error::Scheme(format!(
                "frequency closure violated for {}: ω_ab−ω_ac = {lhs:e}, expected {rhs:e}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Field carriers ν₁..ν₄ (rad/s) for the given detunings; ν₄ follows
    /// from four-photon closure.
    pub fn carriers(&self, det: &Detunings) -> [f64; 4] {
        let s3 = self.kind.signature()[2];
        let nu1 = self.omega_ab + det.delta1;
        let nu2 = self.omega_ac + det.delta2;
        let nu3 = self.omega_dc + det.delta3;
        [nu1, nu2, nu3, nu1 - nu2 + s3 * nu3]
    }
}

/// Single-photon detunings Δ = ν − ω (field minus atom), rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Detunings {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

impl Detunings {
    /// Two-photon (Raman) detuning δ = Δ₁ − Δ₂.
    pub fn two_photon(&self) -> f64 {
        self.delta1 - self.delta2
    }

    /// Detuning of level `d` in the frame, equal to Δ₄ = ν₄ − ω_db.
    pub fn level_d(&self, kind: SchemeKind) -> f64 {
        self.two_photon() + kind.signature()[2] * self.delta3
    }
}

/// Population decay, dephasing and repopulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationModel {
    /// Population decay rates of levels a and d, rad/s.
    pub decay_a: f64,
    pub decay_d: f64,
    /// Coherence decay rates γ_ij (symmetric, diagonal unused), rad/s.
    pub dephasing: [[f64; 4]; 4],
    /// Fraction of decayed a (resp. d) population fed into b; the rest goes to c.
    pub branching_a_to_b: f64,
    pub branching_d_to_b: f64,
    pub repopulation: bool,
}

impl RelaxationModel {
    pub fn none() -> Self {
        Self::from_rates(0.0, 0.0, 0.0)
    }

    /// γ_ij = (Γ_i + Γ_j)/2 + γ_p for every pair.
    pub fn from_rates(decay_a: f64, decay_d: f64, pressure: f64) -> Self {
        let pop = [decay_a, 0.0, 0.0, decay_d];
        let mut dephasing = [[0.0; 4]; 4];
        for (i, row) in dephasing.iter_mut().enumerate() {
            for (j, g) in row.iter_mut().enumerate() {
                if i != j {
                    *g = 0.5 * (pop[i] + pop[j]) + pressure;
                }
            }
        }
        Self {
            decay_a,
            decay_d,
            dephasing,
            branching_a_to_b: 0.5,
            branching_d_to_b: 0.5,
            repopulation: true,
        }
    }

    pub fn population_decay(&self) -> [f64; 4] {
        [self.decay_a, 0.0, 0.0, self.decay_d]
    }

    pub fn validate(&self) -> Result<()> {
        let pop = self.population_decay();
        if pop.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::Relaxation("decay rates must be ≥ 0".into()));
        }
        for b in [self.branching_a_to_b, self.branching_d_to_b] {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::Relaxation("branching ratios must lie in [0, 1]".into()));
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let g = self.dephasing[i][j];
                if g != self.dephasing[j][i] {
                    return Err(Error::Relaxation("dephasing matrix must be symmetric".into()));
                }
                if !(g.is_finite() && g >= 0.5 * (pop[i] + pop[j]) - 1e-12 * g.abs()) {
                    return Err(Error::Relaxation(format!(
                        "γ_{i}{j} = {g:e} below (Γ_i+Γ_j)/2"
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn max_rate(&self) -> f64 {
        let mut m = self.decay_a.max(self.decay_d);
        for row in &self.dephasing {
            for g in row {
                m = m.max(*g);
            }
        }
        m
    }
}

/// 4×4 density matrix in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Mat4);

impl DensityMatrix {
    pub fn pure(level: Level) -> Self {
        let mut m = Mat4::zeros();
        m[(level.idx(), level.idx())] = C64::new(1.0, 0.0);
        Self(m)
    }

    /// Mixed b-c state with the given coherence, populations split equally.
    /// Requires |ρ_bc| ≤ ½.
    pub fn bc_superposition(rho_bc: C64) -> Self {
        let mut m = Mat4::zeros();
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(2, 2)] = C64::new(0.5, 0.0);
        m[(1, 2)] = rho_bc;
        m[(2, 1)] = rho_bc.conj();
        Self(m)
    }

    pub fn get(&self, i: Level, j: Level) -> C64 {
        self.0[(i.idx(), j.idx())]
    }

    pub fn rho_bc(&self) -> C64 {
        self.get(Level::B, Level::C)
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.0[(i, i)].re)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// max |ρ − ρ†| relative to max |ρ|.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                err = err.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
                scale = scale.max(self.0[(i, j)].norm());
            }
        }
        if scale > 0.0 {
            err / scale
        } else {
            0.0
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = self.hermitized();
        h.0.symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(*v))
    }

    pub fn hermitized(&self) -> Self {
        Self((self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Rotating-frame Hamiltonian H/ħ (rad/s).
///
/// Diagonal: `{−Δ₁, 0, −δ, −Δ_d}`; field α contributes `−Ω_α` at
/// `(upper, lower)` and `−Ω_α*` at `(lower, upper)`.
pub fn build_rwa_hamiltonian(kind: SchemeKind, det: &Detunings, omegas: &[C64; 4]) -> Result<Mat4> {
    for (field, w) in omegas.iter().enumerate() {
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::NonFiniteRabi { field: field + 1 });
        }
    }
    Ok(hamiltonian_unchecked(kind, det, omegas))
}

pub(crate) fn hamiltonian_unchecked(kind: SchemeKind, det: &Detunings, omegas: &[C64; 4]) -> Mat4 {
    let mut h = Mat4::zeros();
    h[(0, 0)] = C64::new(-det.delta1, 0.0);
    h[(2, 2)] = C64::new(-det.two_photon(), 0.0);
    h[(3, 3)] = C64::new(-det.level_d(kind), 0.0);
    for (field, w) in omegas.iter().enumerate() {
        let (u, l) = kind.transition(field);
        h[(u.idx(), l.idx())] = -w;
        h[(l.idx(), u.idx())] = -w.conj();
    }
    h
}

/// dρ/dτ = −i[H, ρ] − relaxation + repopulation.
pub fn liouville_rhs(rho: &DensityMatrix, h: &Mat4, relax: &RelaxationModel) -> Mat4 {
    let r = &rho.0;
    let comm = h * r - r * h;
    let mut out = comm * C64::new(0.0, -1.0);
    let pop = relax.population_decay();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                out[(i, i)] -= r[(i, i)] * pop[i];
            } else {
                out[(i, j)] -= r[(i, j)] * relax.dephasing[i][j];
            }
        }
    }
    if relax.repopulation {
        let from_a = r[(0, 0)].re * relax.decay_a;
        let from_d = r[(3, 3)].re * relax.decay_d;
        let to_b = relax.branching_a_to_b * from_a + relax.branching_d_to_b * from_d;
        let to_c = (1.0 - relax.branching_a_to_b) * from_a + (1.0 - relax.branching_d_to_b) * from_d;
        out[(1, 1)] += to_b;
        out[(2, 2)] += to_c;
    }
    out
}

/// Hamiltonians at the start, midpoint and end of one step.
#[derive(Debug, Clone, Copy)]
pub struct StepHamiltonians {
    pub start: Mat4,
    pub mid: Mat4,
    pub end: Mat4,
}

impl StepHamiltonians {
    pub fn constant(h: Mat4) -> Self {
        Self {
            start: h,
            mid: h,
            end: h,
        }
    }

    pub(crate) fn max_rate(&self) -> f64 {
        [self.start, self.mid, self.end]
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0_f64, |m, z| m.max(z.norm()))
    }
}

/// Per-step numerical hygiene, measured before any correction is applied.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDiagnostics {
    pub trace_drift: f64,
    pub hermiticity_error: f64,
    pub renormalized: bool,
}

/// Trace drift beyond which the state is renormalized.
pub const TRACE_RENORMALIZE_THRESHOLD: f64 = 1e-9;
/// Upper bound on dt times the fastest rate in the problem.
pub const STABILITY_LIMIT: f64 = 0.5;

/// Classical fourth-order Runge–Kutta step. The result is re-Hermitized;
/// the trace is renormalized only when its drift exceeds
/// [`TRACE_RENORMALIZE_THRESHOLD`].
pub fn step_density_matrix(
    rho: &DensityMatrix,
    h: &StepHamiltonians,
    relax: &RelaxationModel,
    dt: f64,
) -> Result<(DensityMatrix, StepDiagnostics)> {
    let product = dt * h.max_rate().max(relax.max_rate());
    if !(dt > 0.0) || product >= STABILITY_LIMIT {
        return Err(Error::StepSize { dt, product });
    }
    Ok(rk4_unchecked(rho, h, relax, dt))
}

pub(crate) fn rk4_unchecked(
    rho: &DensityMatrix,
    h: &StepHamiltonians,
    relax: &RelaxationModel,
    dt: f64,
) -> (DensityMatrix, StepDiagnostics) {
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = liouville_rhs(rho, &h.start, relax);
    let k2 = liouville_rhs(&DensityMatrix(rho.0 + k1 * half), &h.mid, relax);
    let k3 = liouville_rhs(&DensityMatrix(rho.0 + k2 * half), &h.mid, relax);
    let k4 = liouville_rhs(&DensityMatrix(rho.0 + k3 * full), &h.end, relax);
    let next = DensityMatrix(rho.0 + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0));

    let hermiticity_error = next.hermiticity_error();
    let mut out = next.hermitized();
    let tr = out.trace().re;
    let trace_drift = (tr - 1.0).abs();
    let renormalized = trace_drift > TRACE_RENORMALIZE_THRESHOLD;
    if renormalized {
        log::debug!("trace drift {trace_drift:e}; renormalizing");
        out.0 /= C64::new(tr, 0.0);
    }
    (
        out,
        StepDiagnostics {
            trace_drift,
            hermiticity_error,
            renormalized,
        },
    )
}

/// b–c coherence of the instantaneous dark state `∝ Ω₂|b⟩ − Ω₁|c⟩`:
/// ρ_bc = −Ω₁*Ω₂ / (|Ω₁|² + |Ω₂|²).
pub fn dark_state_coherence(omega1: C64, omega2: C64) -> Result<C64> {
    let norm = omega1.norm_sqr() + omega2.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::UndefinedDarkState);
    }
    Ok(-(omega1.conj() * omega2) / norm)
}
