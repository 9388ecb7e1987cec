//! Run configuration files, presets and parameter sweeps.
//!
//! Files are TOML with the unit carried in every key name
//! (`density_per_cm3`, `duration_fs`, ...). [`RunConfig`] mirrors the file
//! one-to-one so that dumping and reloading is lossless; [`RunConfig::resolve`]
//! is the single place where values are converted to SI.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{intensity, SincForm};
use crate::error::{Error, Result};
use crate::propagation::{CellSetup, GridSpec, MediumSpec};
use crate::pulses::{stirap_coherence_window, PulseSpec, ScenarioKind, ScenarioSpec};
use crate::quantum::{DensityMatrix, Detunings, Level, LevelScheme, RelaxationModel, SchemeKind, C64};
use crate::units::{
    cm_to_m, debye_to_si, fs_to_s, mhz_to_rad_per_s, per_cm3_to_per_m3, thz_to_rad_per_s, SPEED_OF_LIGHT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub label: String,
    pub transition_ab_thz: f64,
    pub transition_ac_thz: f64,
    pub transition_dc_thz: f64,
    pub transition_db_thz: f64,
    pub dipole_ab_debye: f64,
    pub dipole_ac_debye: f64,
    pub dipole_dc_debye: f64,
    pub dipole_db_debye: f64,
    #[serde(default = "yes")]
    pub validated: bool,
}

fn yes() -> bool {
    true
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DetuningConfig {
    #[serde(default)]
    pub delta1_mhz: f64,
    #[serde(default)]
    pub delta2_mhz: f64,
    #[serde(default)]
    pub delta3_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationConfig {
    #[serde(default)]
    pub decay_a_mhz: f64,
    #[serde(default)]
    pub decay_d_mhz: f64,
    #[serde(default)]
    pub pressure_broadening_mhz: f64,
    #[serde(default = "half")]
    pub branching_a_to_b: f64,
    #[serde(default = "half")]
    pub branching_d_to_b: f64,
    #[serde(default = "yes")]
    pub repopulation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub peak_rabi_per_s: f64,
    #[serde(default)]
    pub phase_rad: f64,
    pub center_fs: f64,
    pub duration_fs: f64,
}

impl PulseConfig {
    fn off() -> Self {
        Self {
            peak_rabi_per_s: 0.0,
            phase_rad: 0.0,
            center_fs: 0.0,
            duration_fs: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub pulse1: PulseConfig,
    pub pulse2: PulseConfig,
    pub pulse3: PulseConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub density_per_cm3: f64,
    pub length_cm: f64,
    #[serde(default = "one")]
    pub fill_factor: f64,
    #[serde(default)]
    pub loss_per_cm: [f64; 4],
    #[serde(default = "ones")]
    pub refractive_index: [f64; 4],
    pub beam_area_cm2: f64,
}

fn one() -> f64 {
    1.0
}

fn ones() -> [f64; 4] {
    [1.0; 4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nz: usize,
    pub nt: usize,
    pub window_start_fs: f64,
    pub window_end_fs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    #[serde(default)]
    pub frozen_coherence: bool,
    #[serde(default)]
    pub frozen_rho_bc_re: f64,
    #[serde(default)]
    pub frozen_rho_bc_im: f64,
    #[serde(default)]
    pub strict_mr: bool,
    #[serde(default)]
    pub compat_sinc: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Descriptive values that never enter the computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MetadataConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optical_pulse_energy_uj: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub detuning: DetuningConfig,
    pub relaxation: RelaxationConfig,
    pub scenario: ScenarioConfig,
    pub medium: MediumConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub options: OptionsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub metadata: MetadataConfig,
}

/// A configuration converted to SI and checked.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub setup: CellSetup,
    /// m².
    pub beam_area: f64,
    pub strict_mr: bool,
    pub sinc_form: SincForm,
}

impl ResolvedRun {
    pub fn frozen(&self) -> bool {
        self.setup.frozen_coherence.is_some()
    }
}

fn pulse_si(p: &PulseConfig) -> PulseSpec {
    PulseSpec {
        peak: C64::from_polar(p.peak_rabi_per_s, p.phase_rad),
        center: fs_to_s(p.center_fs),
        duration: fs_to_s(p.duration_fs),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn level_scheme(&self) -> LevelScheme {
        let s = &self.scheme;
        LevelScheme {
            kind: s.kind,
            omega_ab: thz_to_rad_per_s(s.transition_ab_thz),
            omega_ac: thz_to_rad_per_s(s.transition_ac_thz),
            omega_dc: thz_to_rad_per_s(s.transition_dc_thz),
            omega_db: thz_to_rad_per_s(s.transition_db_thz),
            dipoles: [s.dipole_ab_debye, s.dipole_ac_debye, s.dipole_dc_debye, s.dipole_db_debye].map(debye_to_si),
            validated: s.validated,
        }
    }

    pub fn detunings(&self) -> Detunings {
        Detunings {
            delta1: mhz_to_rad_per_s(self.detuning.delta1_mhz),
            delta2: mhz_to_rad_per_s(self.detuning.delta2_mhz),
            delta3: mhz_to_rad_per_s(self.detuning.delta3_mhz),
        }
    }

    pub fn relaxation_model(&self) -> RelaxationModel {
        let r = &self.relaxation;
        let mut m = RelaxationModel::from_rates(
            mhz_to_rad_per_s(r.decay_a_mhz),
            mhz_to_rad_per_s(r.decay_d_mhz),
            mhz_to_rad_per_s(r.pressure_broadening_mhz),
        );
        m.branching_a_to_b = r.branching_a_to_b;
        m.branching_d_to_b = r.branching_d_to_b;
        m.repopulation = r.repopulation;
        m
    }

    pub fn scenario_spec(&self) -> ScenarioSpec {
        let s = &self.scenario;
        ScenarioSpec {
            kind: s.kind,
            pulses: [pulse_si(&s.pulse1), pulse_si(&s.pulse2), pulse_si(&s.pulse3)],
        }
    }

    pub fn medium_spec(&self) -> MediumSpec {
        let m = &self.medium;
        MediumSpec {
            density: per_cm3_to_per_m3(m.density_per_cm3),
            length: cm_to_m(m.length_cm),
            fill_factor: m.fill_factor,
            loss: m.loss_per_cm.map(|k| k * 1e2),
            refractive_index: m.refractive_index,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            nz: self.grid.nz,
            nt: self.grid.nt,
            tau_start: fs_to_s(self.grid.window_start_fs),
            tau_end: fs_to_s(self.grid.window_end_fs),
        }
    }

    /// Every violated constraint, each naming its key.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                v.push(msg.to_string());
            }
        };
        let s = &self.scheme;
        for (name, val) in [
            ("scheme.transition_ab_thz", s.transition_ab_thz),
            ("scheme.transition_ac_thz", s.transition_ac_thz),
            ("scheme.transition_dc_thz", s.transition_dc_thz),
            ("scheme.transition_db_thz", s.transition_db_thz),
            ("scheme.dipole_ab_debye", s.dipole_ab_debye),
            ("scheme.dipole_ac_debye", s.dipole_ac_debye),
            ("scheme.dipole_dc_debye", s.dipole_dc_debye),
            ("scheme.dipole_db_debye", s.dipole_db_debye),
        ] {
            check(val > 0.0 && val.is_finite(), &format!("{name} must be > 0"));
        }
        if let Err(Error::Scheme(msg)) = self.level_scheme().validate() {
            if msg.contains("closure") {
                v.push(format!("scheme: {msg}"));
            }
        }
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                v.push(msg.to_string());
            }
        };
        let r = &self.relaxation;
        for (name, val) in [
            ("relaxation.decay_a_mhz", r.decay_a_mhz),
            ("relaxation.decay_d_mhz", r.decay_d_mhz),
            ("relaxation.pressure_broadening_mhz", r.pressure_broadening_mhz),
        ] {
            check(val >= 0.0 && val.is_finite(), &format!("{name} must be ≥ 0"));
        }
        for (name, val) in [
            ("relaxation.branching_a_to_b", r.branching_a_to_b),
            ("relaxation.branching_d_to_b", r.branching_d_to_b),
        ] {
            check((0.0..=1.0).contains(&val), &format!("{name} must lie in [0, 1]"));
        }
        for (i, p) in [&self.scenario.pulse1, &self.scenario.pulse2, &self.scenario.pulse3]
            .into_iter()
            .enumerate()
        {
            check(
                p.duration_fs > 0.0 && p.duration_fs.is_finite(),
                &format!("scenario.pulse{}.duration_fs must be > 0", i + 1),
            );
            check(
                p.peak_rabi_per_s.is_finite() && p.center_fs.is_finite() && p.phase_rad.is_finite(),
                &format!("scenario.pulse{} values must be finite", i + 1),
            );
        }
        let m = &self.medium;
        check(m.density_per_cm3 > 0.0 && m.density_per_cm3.is_finite(), "medium.N (density_per_cm3) must be > 0");
        check(m.length_cm > 0.0 && m.length_cm.is_finite(), "medium.length_cm must be > 0");
        check(m.fill_factor > 0.0 && m.fill_factor <= 1.0, "medium.fill_factor must lie in (0, 1]");
        check(m.loss_per_cm.iter().all(|k| *k >= 0.0 && k.is_finite()), "medium.loss_per_cm must be ≥ 0");
        check(m.refractive_index.iter().all(|n| *n >= 1.0 && n.is_finite()), "medium.refractive_index must be ≥ 1");
        check(m.beam_area_cm2 > 0.0 && m.beam_area_cm2.is_finite(), "medium.beam_area_cm2 must be > 0");
        let g = &self.grid;
        check(g.nz >= 1, "grid.nz must be ≥ 1");
        check(g.nt >= 4, "grid.nt must be ≥ 4");
        check(g.window_end_fs > g.window_start_fs, "grid.window_end_fs must exceed grid.window_start_fs");
        let o = &self.options;
        if o.frozen_coherence {
            let r = C64::new(o.frozen_rho_bc_re, o.frozen_rho_bc_im).norm();
            check(r <= 0.5, "options.frozen_rho_bc must satisfy |ρ_bc| ≤ 0.5");
        }
        if v.is_empty() {
            let durations_ok = [&self.scenario.pulse1, &self.scenario.pulse2, &self.scenario.pulse3]
                .iter()
                .all(|p| p.duration_fs > 0.0);
            if durations_ok {
                if let Err(e) = self.scenario_spec().validate() {
                    let msg = match e {
                        Error::Config(m) => m,
                        other => other.to_string(),
                    };
                    v.push(format!("scenario: {msg}"));
                }
            }
        }
        v
    }

    /// Validates everything and converts to SI.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        let o = &self.options;
        let frozen = o
            .frozen_coherence
            .then(|| C64::new(o.frozen_rho_bc_re, o.frozen_rho_bc_im));
        let initial = match frozen {
            Some(r) => DensityMatrix::bc_superposition(r),
            None => DensityMatrix::pure(Level::B),
        };
        Ok(ResolvedRun {
            setup: CellSetup {
                scheme: self.level_scheme(),
                detunings: self.detunings(),
                relaxation: self.relaxation_model(),
                medium: self.medium_spec(),
                scenario: self.scenario_spec(),
                grid: self.grid_spec(),
                initial,
                frozen_coherence: frozen,
            },
            beam_area: self.medium.beam_area_cm2 * 1e-4,
            strict_mr: o.strict_mr,
            sinc_form: if o.compat_sinc { SincForm::Printed } else { SincForm::Exact },
        })
    }

    /// SHA-256 over every value that can influence the computed fields.
    pub fn physics_hash(&self) -> String {
        let mut physics = self.clone();
        physics.output = OutputConfig::default();
        physics.metadata = MetadataConfig::default();
        physics.options.strict_mr = false;
        physics.scheme.label.clear();
        let digest = Sha256::digest(physics.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Loads and validates a configuration file, reporting every violation.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = RunConfig::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Validation(v))
    }
}

pub fn dump_config(cfg: &RunConfig, path: &Path) -> Result<()> {
    std::fs::write(path, cfg.to_toml_string()).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// presets

pub const PRESETS: &[&str] = &["ch3f-seq", "ch3f-stirap", "ch3f-ladder-seq", "methanol-eff"];

const TAU_CH3F_FS: f64 = 150.0;
const OPTICAL_RABI: f64 = 0.3e15;
const PROBE_RABI: f64 = 1e12;

fn thz_of_wavelength_um(um: f64) -> f64 {
    SPEED_OF_LIGHT / (um * 1e-6) / 1e12
}

/// CH₃F level data: IR probe on the 9P20 CO₂ line (9.55 µm), THz at 500 µm,
/// ℘_v = 0.1 D on the IR transition and ℘_j = 1 D on the THz transition.
/// The optical transitions are not characterized; 600 THz and 1 D are
/// placeholders (only the Rabi frequencies enter the dynamics).
pub fn ch3f_scheme(kind: SchemeKind) -> SchemeConfig {
    let ir = thz_of_wavelength_um(9.55);
    let thz = thz_of_wavelength_um(500.0);
    let ab = 600.0;
    // closure: ω_ab − ω_ac = ω_db − s₃ ω_dc
    let ac = ab - (thz - kind.signature()[2] * ir);
    SchemeConfig {
        kind,
        label: format!("CH3F {kind}"),
        transition_ab_thz: ab,
        transition_ac_thz: ac,
        transition_dc_thz: ir,
        transition_db_thz: thz,
        dipole_ab_debye: 1.0,
        dipole_ac_debye: 1.0,
        dipole_dc_debye: 0.1,
        dipole_db_debye: 1.0,
        validated: true,
    }
}

/// Methanol level data for the efficiency estimate: THz at 100 µm,
/// IR on the 9P34 CO₂ line (9.695 µm), ℘_v = ℘_j = 1 D.
pub fn methanol_scheme() -> SchemeConfig {
    let ir = thz_of_wavelength_um(9.695);
    let thz = thz_of_wavelength_um(100.0);
    let ab = 600.0;
    SchemeConfig {
        kind: SchemeKind::DoubleLambda,
        label: "CH3OH double-lambda".into(),
        transition_ab_thz: ab,
        transition_ac_thz: ab - (thz - ir),
        transition_dc_thz: ir,
        transition_db_thz: thz,
        dipole_ab_debye: 1.0,
        dipole_ac_debye: 1.0,
        dipole_dc_debye: 1.0,
        dipole_db_debye: 1.0,
        validated: true,
    }
}

/// Rb ladder: a = 5S₁/₂, b = 10P, c = 6P, d = 8D, energies from the
/// quantum-defect formula. Dipole moments are placeholders.
pub fn rubidium_scheme() -> SchemeConfig {
    const CM1_TO_THZ: f64 = 0.029_979_245_8;
    let (e_5s, e_6p, e_10p, e_8d) = (0.0, 23_715.08, 31_659.0, 31_208.0);
    SchemeConfig {
        kind: SchemeKind::LadderLambda,
        label: "Rb ladder (placeholder dipoles)".into(),
        transition_ab_thz: (e_10p - e_5s) * CM1_TO_THZ,
        transition_ac_thz: (e_6p - e_5s) * CM1_TO_THZ,
        transition_dc_thz: (e_8d - e_6p) * CM1_TO_THZ,
        transition_db_thz: (e_10p - e_8d) * CM1_TO_THZ,
        dipole_ab_debye: 1.0,
        dipole_ac_debye: 1.0,
        dipole_dc_debye: 1.0,
        dipole_db_debye: 1.0,
        validated: false,
    }
}

/// Beam area (cm²) at which a Gaussian pulse of the given peak Rabi
/// frequency and FWHM carries `energy_uj`.
fn beam_area_for_energy(peak: f64, duration_fs: f64, dipole_debye: f64, energy_uj: f64) -> f64 {
    let p = PulseSpec {
        peak: C64::new(peak, 0.0),
        center: 0.0,
        duration: fs_to_s(duration_fs),
    };
    let fluence = intensity(C64::new(peak, 0.0), debye_to_si(dipole_debye)) * p.intensity_integral() / peak.powi(2);
    energy_uj * 1e-6 / fluence * 1e4
}

fn ch3f_base(kind: SchemeKind) -> RunConfig {
    let tau = TAU_CH3F_FS;
    RunConfig {
        scheme: ch3f_scheme(kind),
        detuning: DetuningConfig {
            delta1_mhz: 300.0,
            delta2_mhz: 300.0,
            delta3_mhz: 0.0,
        },
        relaxation: RelaxationConfig {
            decay_a_mhz: 0.0,
            decay_d_mhz: 0.0,
            pressure_broadening_mhz: 250.0,
            branching_a_to_b: 0.5,
            branching_d_to_b: 0.5,
            repopulation: true,
        },
        scenario: ScenarioConfig {
            kind: ScenarioKind::Sequential,
            pulse1: PulseConfig {
                peak_rabi_per_s: OPTICAL_RABI,
                phase_rad: 0.0,
                center_fs: 0.0,
                duration_fs: tau,
            },
            pulse2: PulseConfig {
                peak_rabi_per_s: OPTICAL_RABI,
                phase_rad: 0.0,
                center_fs: 0.0,
                duration_fs: tau,
            },
            pulse3: PulseConfig {
                peak_rabi_per_s: PROBE_RABI,
                phase_rad: 0.0,
                center_fs: 3.0 * tau,
                duration_fs: tau,
            },
        },
        medium: MediumConfig {
            density_per_cm3: 1e17,
            length_cm: 1.0,
            fill_factor: 1.0,
            loss_per_cm: [0.0; 4],
            refractive_index: [1.0; 4],
            beam_area_cm2: beam_area_for_energy(OPTICAL_RABI, tau, 1.0, 30.0),
        },
        grid: GridConfig {
            nz: 100,
            nt: 4096,
            window_start_fs: -6.0 * tau,
            window_end_fs: 12.0 * tau,
        },
        options: OptionsConfig::default(),
        output: OutputConfig::default(),
        metadata: MetadataConfig {
            temperature_k: Some(300.0),
            optical_pulse_energy_uj: Some(30.0),
            note: None,
        },
    }
}

/// Preset configuration by name.
pub fn preset_config(name: &str) -> Result<RunConfig> {
    let tau = TAU_CH3F_FS;
    match name {
        "ch3f-seq" => Ok(ch3f_base(SchemeKind::DoubleLambda)),
        "ch3f-ladder-seq" => Ok(ch3f_base(SchemeKind::LadderLambda)),
        "ch3f-stirap" => {
            let mut c = ch3f_base(SchemeKind::DoubleLambda);
            let delay = tau;
            let probe = 3.0 * stirap_coherence_window(tau, delay);
            c.scenario.kind = ScenarioKind::Stirap;
            c.scenario.pulse2.center_fs = 0.0;
            c.scenario.pulse1.center_fs = delay;
            c.scenario.pulse3.center_fs = 0.5 * delay;
            c.scenario.pulse3.duration_fs = probe;
            c.grid.window_start_fs = -9.0 * tau;
            c.grid.window_end_fs = 10.0 * tau;
            Ok(c)
        }
        "methanol-eff" => {
            let tau = 1000.0;
            let rabi = 0.05e15;
            Ok(RunConfig {
                scheme: methanol_scheme(),
                detuning: DetuningConfig {
                    delta1_mhz: 300.0,
                    delta2_mhz: 300.0,
                    delta3_mhz: 0.0,
                },
                relaxation: RelaxationConfig {
                    decay_a_mhz: 0.0,
                    decay_d_mhz: 0.0,
                    pressure_broadening_mhz: 250.0,
                    branching_a_to_b: 0.5,
                    branching_d_to_b: 0.5,
                    repopulation: true,
                },
                scenario: ScenarioConfig {
                    kind: ScenarioKind::Sequential,
                    pulse1: PulseConfig::off(),
                    pulse2: PulseConfig::off(),
                    pulse3: PulseConfig {
                        peak_rabi_per_s: 1e9,
                        phase_rad: 0.0,
                        center_fs: 0.0,
                        duration_fs: tau,
                    },
                },
                medium: MediumConfig {
                    density_per_cm3: 5e16,
                    length_cm: 10.0,
                    fill_factor: 1.0,
                    loss_per_cm: [0.0; 4],
                    refractive_index: [1.0; 4],
                    beam_area_cm2: beam_area_for_energy(rabi, tau, 1.0, 30.0),
                },
                grid: GridConfig {
                    nz: 100,
                    nt: 2048,
                    window_start_fs: -5.0 * tau,
                    window_end_fs: 5.0 * tau,
                },
                options: OptionsConfig {
                    frozen_coherence: true,
                    frozen_rho_bc_re: 0.4,
                    frozen_rho_bc_im: 0.0,
                    strict_mr: false,
                    compat_sinc: false,
                },
                output: OutputConfig::default(),
                metadata: MetadataConfig {
                    temperature_k: Some(300.0),
                    optical_pulse_energy_uj: None,
                    note: Some("efficiency estimate set: tau = 1 ps, L = 10 cm, N = 5e16 cm^-3, lambda = 100 um".into()),
                },
            })
        }
        _ => Err(Error::UnknownPreset {
            name: name.to_string(),
            valid: PRESETS.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// Preset as fully converted physics types.
pub fn scenario_presets(name: &str) -> Result<(LevelScheme, ScenarioSpec, MediumSpec, RelaxationModel)> {
    let c = preset_config(name)?;
    let r = c.resolve()?;
    Ok((r.setup.scheme, r.setup.scenario, r.setup.medium, r.setup.relaxation))
}

// ---------------------------------------------------------------------------
// sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted key path into the run config, array elements by index
    /// (`medium.refractive_index.3`).
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeSpec>,
}

impl SweepAxis {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match (&self.values, &self.range) {
            (Some(v), None) => v.clone(),
            (None, Some(r)) => {
                if r.count < 2 {
                    return Err(Error::Sweep(format!("axis {}: range needs count ≥ 2", self.path)));
                }
                (0..r.count)
                    .map(|i| r.start + (r.stop - r.start) * i as f64 / (r.count - 1) as f64)
                    .collect()
            }
            _ => {
                return Err(Error::Sweep(format!(
                    "axis {}: give exactly one of `values` or `range`",
                    self.path
                )))
            }
        };
        if pts.len() < 2 {
            return Err(Error::Sweep(format!("axis {} needs at least 2 values", self.path)));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_preset: Option<String>,
    /// Path of a run config, relative to the sweep file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_config: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<RunConfig>,
    pub axis: Vec<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    /// `(path, value)` per axis, in file units.
    pub coords: Vec<(String, f64)>,
    pub config: RunConfig,
}

pub fn load_sweep(path: &Path) -> Result<(SweepSpec, PathBuf)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: SweepSpec = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((spec, dir))
}

fn base_config(spec: &SweepSpec, base_dir: &Path) -> Result<RunConfig> {
    match (&spec.base_preset, &spec.base_config, &spec.base) {
        (Some(p), None, None) => preset_config(p),
        (None, Some(path), None) => load_config(&base_dir.join(path)),
        (None, None, Some(c)) => Ok(c.clone()),
        _ => Err(Error::Sweep(
            "give exactly one of base_preset, base_config or [base]".into(),
        )),
    }
}

fn set_path(root: &mut toml::Value, path: &str, value: f64) -> Result<()> {
    let mut node = root;
    for seg in path.split('.') {
        node = match node {
            toml::Value::Table(t) => t.get_mut(seg),
            toml::Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| Error::Sweep(format!("parameter path `{path}` does not exist in the run config")))?;
    }
    *node = match node {
        toml::Value::Float(_) => toml::Value::Float(value),
        toml::Value::Integer(_) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
        _ => {
            return Err(Error::Sweep(format!("parameter path `{path}` is not a numeric value")));
        }
    };
    Ok(())
}

/// Applies `path = value` overrides to a copy of `cfg`.
pub fn with_overrides(cfg: &RunConfig, overrides: &[(String, f64)]) -> Result<RunConfig> {
    let mut tree = toml::Value::try_from(cfg).map_err(|e| Error::Config(e.to_string()))?;
    for (path, value) in overrides {
        set_path(&mut tree, path, *value)?;
    }
    tree.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

/// Cartesian product of the axes, first axis slowest.
pub fn expand_sweep(spec: &SweepSpec, base_dir: &Path) -> Result<Vec<SweepPoint>> {
    if spec.axis.is_empty() {
        return Err(Error::Sweep("sweep has no axes".into()));
    }
    if spec.axis.len() > 2 {
        return Err(Error::Sweep("at most two sweep axes are supported".into()));
    }
    let base = base_config(spec, base_dir)?;
    let axes: Vec<Vec<f64>> = spec.axis.iter().map(SweepAxis::points).collect::<Result<_>>()?;
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for pts in &axes {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                pts.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push(*v);
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(index, vals)| {
            let coords: Vec<(String, f64)> = spec.axis.iter().map(|a| a.path.clone()).zip(vals).collect();
            let config = with_overrides(&base, &coords)?;
            Ok(SweepPoint { index, coords, config })
        })
        .collect()
}

/// Flat `key = value` listing, used for manifests.
pub type FlatMap = BTreeMap<String, String>;
