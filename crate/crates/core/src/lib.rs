//! Four-level Maxwell–Bloch simulator for THz generation by coherent
//! frequency mixing in double-Λ and ladder-Λ media.
//!
//! The pipeline is [`config::RunConfig`] → [`propagation::march_cell`] →
//! [`analytics::RunReport`] → [`artifacts::write_run_artifacts`].

pub mod analytics;
pub mod artifacts;
pub mod config;
pub mod error;
pub mod propagation;
pub mod pulses;
pub mod quantum;
pub mod run;
pub mod units;

pub use analytics::{
    analytic_output_field, efficiency_formula, manley_rowe_energy_bound, manley_rowe_residual, photon_flux,
    EfficiencyInputs, RunReport, SincForm, MANLEY_ROWE_STRICT,
};
pub use config::{expand_sweep, load_config, preset_config, scenario_presets, RunConfig, SweepSpec, PRESETS};
pub use error::{Error, Result};
pub use propagation::{march_cell, CellSetup, FieldGrid, GridSpec, MarchOutput, MediumSpec, WaveguideMode};
pub use pulses::{boundary_fields, gaussian_envelope, PulseSpec, ScenarioKind, ScenarioSpec};
pub use quantum::{
    build_rwa_hamiltonian, dark_state_coherence, liouville_rhs, step_density_matrix, DensityMatrix, Detunings, Level,
    LevelScheme, RelaxationModel, SchemeKind, C64,
};
pub use run::{run_sweep, simulate, Simulation};
