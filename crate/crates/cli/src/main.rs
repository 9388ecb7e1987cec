//! `thzsim`: run Maxwell–Bloch simulations, evaluate the efficiency
//! estimate, execute sweeps and audit photon-number conservation.
//!
//! Exit codes: 0 success, 1 physics-validation failure, 2 usage or
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thz_core::analytics::{photon_flux_profile, residual_from_fluxes};
use thz_core::artifacts::load_run;
use thz_core::config::{load_config, load_sweep, preset_config, RunConfig};
use thz_core::run::{member_dir, run_sweep, write_sweep_aggregate, SWEEP_AGGREGATE_FILE};
use thz_core::units::{debye_to_si, per_cm3_to_per_m3};
use thz_core::{
    efficiency_formula, expand_sweep, manley_rowe_energy_bound, simulate, EfficiencyInputs, Error, SincForm,
    MANLEY_ROWE_STRICT,
};

const OUT_ENV: &str = "THZSIM_OUT_DIR";
const DEFAULT_OUT: &str = "thzsim-out";
/// Default |ρ_bc| imposed by --frozen-coherence when the config has none.
const DEFAULT_FROZEN_RHO: f64 = 0.4;

#[derive(Parser)]
#[command(name = "thzsim", version, about = "Coherent THz generation in four-level media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March a cell and write fields.csv, coherence.csv, report.csv and a manifest.
    Simulate(SimulateArgs),
    /// Evaluate the closed-form conversion efficiency.
    Efficiency(EfficiencyArgs),
    /// Run every point of a sweep file and write an aggregate CSV.
    Sweep(SweepArgs),
    /// Recompute photon fluxes from a run directory and check the Manley–Rowe residual.
    CheckMr(CheckMrArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset: ch3f-seq, ch3f-stirap, ch3f-ladder-seq, methanol-eff.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory [default: $THZSIM_OUT_DIR or ./thzsim-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hold ρ_bc fixed and propagate only the THz field (analytic-oracle mode).
    #[arg(long)]
    frozen_coherence: bool,
    /// Exit 1 when the Manley–Rowe residual exceeds 1e-6.
    #[arg(long)]
    strict_mr: bool,
}

#[derive(Args)]
struct EfficiencyArgs {
    /// IR transition dipole moment ℘_v [D].
    #[arg(long)]
    dipole_v_debye: f64,
    /// THz transition dipole moment ℘_j [D].
    #[arg(long)]
    dipole_j_debye: f64,
    /// Molecular density N [cm⁻³].
    #[arg(long)]
    density_per_cm3: f64,
    /// Prepared coherence |ρ_bc| [dimensionless, ≤ 0.5].
    #[arg(long)]
    rho_bc: f64,
    /// Pulse duration τ [ps].
    #[arg(long)]
    tau_ps: f64,
    /// Cell length L [cm].
    #[arg(long)]
    length_cm: f64,
    /// THz wavelength λ [µm].
    #[arg(long)]
    lambda_um: f64,
    /// Phase mismatch δk·L [rad].
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta_kl_rad: f64,
    /// Transverse mode-overlap factor ξ [dimensionless].
    #[arg(long, default_value_t = 1.0)]
    fill_factor: f64,
    /// Use sinc(δkL) instead of the exact sinc(δkL/2).
    #[arg(long)]
    compat_sinc: bool,
    /// IR input pulse energy for the photon-number bound [µJ].
    #[arg(long)]
    input_energy_uj: Option<f64>,
    /// IR input wavelength for the photon-number bound [µm].
    #[arg(long, default_value_t = 9.55)]
    input_lambda_um: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep specification file (TOML).
    #[arg(long)]
    sweep: PathBuf,
    /// Output directory [default: $THZSIM_OUT_DIR or ./thzsim-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of runs executed concurrently [count].
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Args)]
struct CheckMrArgs {
    /// Directory written by `simulate`.
    #[arg(long)]
    run: PathBuf,
}

/// Result of one command.
#[derive(Debug)]
struct CommandOutcome {
    code: u8,
    summary: String,
    artifacts: Vec<PathBuf>,
}

impl CommandOutcome {
    fn ok(summary: String, artifacts: Vec<PathBuf>) -> Self {
        Self {
            code: 0,
            summary,
            artifacts,
        }
    }

    fn physics(summary: String, artifacts: Vec<PathBuf>) -> Self {
        Self {
            code: 1,
            summary: format!("FAIL: {summary}"),
            artifacts,
        }
    }

    fn usage(summary: String) -> Self {
        Self {
            code: 2,
            summary: format!("error: {summary}"),
            artifacts: Vec::new(),
        }
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::UndefinedDarkState | Error::SignatureMismatch { .. } => {
                Self::physics(e.to_string(), Vec::new())
            }
            _ => Self::usage(e.to_string()),
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn load_run_config(args: &SimulateArgs) -> Result<RunConfig, Error> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => load_config(path)?,
        (None, Some(name)) => preset_config(name)?,
        _ => return Err(Error::Config("give exactly one of --config or --preset".into())),
    };
    if args.frozen_coherence {
        let o = &mut cfg.options;
        o.frozen_coherence = true;
        if o.frozen_rho_bc_re == 0.0 && o.frozen_rho_bc_im == 0.0 {
            o.frozen_rho_bc_re = DEFAULT_FROZEN_RHO;
        }
    }
    if args.strict_mr {
        cfg.options.strict_mr = true;
    }
    Ok(cfg)
}

fn fmt_opt_fs(s: f64) -> String {
    if s > 0.0 {
        format!("{:.1} fs", s * 1e15)
    } else {
        "n/a".into()
    }
}

fn cmd_simulate(args: SimulateArgs) -> CommandOutcome {
    let cfg = match load_run_config(&args) {
        Ok(c) => c,
        Err(e) => return CommandOutcome::usage(e.to_string()),
    };
    let dir = out_dir(args.out.or_else(|| cfg.output.dir.as_ref().map(PathBuf::from)));
    let sim = match simulate(&cfg) {
        Ok(s) => s,
        Err(e) => return CommandOutcome::from_error(&e),
    };
    let manifest = match sim.write(&dir) {
        Ok(p) => p,
        Err(e) => return CommandOutcome::usage(e.to_string()),
    };
    let r = &sim.report;
    let mode = if r.frozen_coherence {
        "frozen-coherence (oracle comparison)"
    } else {
        "full Maxwell-Bloch"
    };
    let summary = format!(
        "scheme: {}\nmode: {mode}\nefficiency E4(L)/E3(0): {:.6e}\npeak |rho_bc|: {:.6}\nTHz FWHM: {}\nIR probe FWHM: {}\n\
         Manley-Rowe residual at L: {:.3e} (max |.| {:.3e})\nhygiene: trace drift {:.1e}, hermiticity {:.1e}, min eigenvalue {:.1e}",
        r.scheme,
        r.efficiency,
        r.peak_rho_bc,
        fmt_opt_fs(r.thz_fwhm),
        fmt_opt_fs(r.probe_fwhm),
        r.mr_residual,
        r.mr_residual_max_abs,
        r.max_trace_drift,
        r.max_hermiticity_error,
        r.min_eigenvalue,
    );
    let artifacts = ["fields.csv", "coherence.csv", "report.csv"]
        .iter()
        .map(|f| dir.join(f))
        .chain([manifest])
        .collect();
    if sim.strict_mr && !r.mr_passes() {
        return CommandOutcome::physics(
            format!(
                "{summary}\nstrict Manley-Rowe check: residual {:.3e} exceeds {MANLEY_ROWE_STRICT:e}",
                r.mr_residual_max_abs
            ),
            artifacts,
        );
    }
    CommandOutcome::ok(summary, artifacts)
}

fn cmd_efficiency(a: EfficiencyArgs) -> CommandOutcome {
    let mut bad = Vec::new();
    for (name, v) in [
        ("--dipole-v-debye", a.dipole_v_debye),
        ("--dipole-j-debye", a.dipole_j_debye),
        ("--density-per-cm3", a.density_per_cm3),
        ("--tau-ps", a.tau_ps),
        ("--length-cm", a.length_cm),
        ("--lambda-um", a.lambda_um),
        ("--input-lambda-um", a.input_lambda_um),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            bad.push(format!("{name} must be > 0"));
        }
    }
    if !(0.0..=0.5).contains(&a.rho_bc) {
        bad.push(format!("--rho-bc = {} outside the physical range [0, 0.5]", a.rho_bc));
    }
    if !(a.fill_factor > 0.0 && a.fill_factor <= 1.0) {
        bad.push("--fill-factor must lie in (0, 1]".into());
    }
    if !a.delta_kl_rad.is_finite() {
        bad.push("--delta-kl-rad must be finite".into());
    }
    if let Some(e) = a.input_energy_uj {
        if !(e >= 0.0 && e.is_finite()) {
            bad.push("--input-energy-uj must be ≥ 0".into());
        }
    }
    if !bad.is_empty() {
        return CommandOutcome::usage(bad.join("; "));
    }
    let inputs = EfficiencyInputs {
        dipole_v: debye_to_si(a.dipole_v_debye),
        dipole_j: debye_to_si(a.dipole_j_debye),
        density: per_cm3_to_per_m3(a.density_per_cm3),
        rho_bc: a.rho_bc,
        tau: a.tau_ps * 1e-12,
        length: a.length_cm * 1e-2,
        lambda: a.lambda_um * 1e-6,
        delta_kl: a.delta_kl_rad,
        fill_factor: a.fill_factor,
    };
    let form = if a.compat_sinc { SincForm::Printed } else { SincForm::Exact };
    let eps = efficiency_formula(&inputs, form);
    let note = if eps == 0.0 {
        "no conversion"
    } else if (0.1..10.0).contains(&eps) {
        "order unity"
    } else if eps < 0.1 {
        "small"
    } else {
        "exceeds unity: perturbative estimate invalid"
    };
    let mut summary = format!("efficiency epsilon = {eps:.6} ({note})");
    if let Some(e) = a.input_energy_uj {
        let bound = manley_rowe_energy_bound(e, a.input_lambda_um, a.lambda_um);
        summary.push_str(&format!(
            "\nManley-Rowe bound: {bound:.4} uJ at {} um from {e} uJ at {} um",
            a.lambda_um, a.input_lambda_um
        ));
    }
    CommandOutcome::ok(summary, Vec::new())
}

fn cmd_sweep(args: SweepArgs) -> CommandOutcome {
    let (spec, base_dir) = match load_sweep(&args.sweep) {
        Ok(v) => v,
        Err(e) => return CommandOutcome::usage(e.to_string()),
    };
    let points = match expand_sweep(&spec, &base_dir) {
        Ok(p) => p,
        Err(e) => return CommandOutcome::usage(e.to_string()),
    };
    if let Some((i, v)) = points.iter().find_map(|p| {
        let v = p.config.violations();
        (!v.is_empty()).then(|| (p.index, v))
    }) {
        return CommandOutcome::usage(format!("sweep point {i}: {}", v.join("; ")));
    }
    let dir = out_dir(args.out);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return CommandOutcome::usage(format!("{}: {e}", dir.display()));
    }
    let n = points.len();
    let rows = match run_sweep(points, args.parallel.max(1), Some(&dir)) {
        Ok(r) => r,
        Err(e) => return CommandOutcome::usage(e.to_string()),
    };
    let aggregate = dir.join(SWEEP_AGGREGATE_FILE);
    if let Err(e) = write_sweep_aggregate(&rows, &aggregate) {
        return CommandOutcome::usage(e.to_string());
    }
    let failed: Vec<String> = rows
        .iter()
        .filter_map(|r| r.result.as_ref().err().map(|e| format!("point {}: {e}", r.point.index)))
        .collect();
    let mut artifacts = vec![aggregate];
    artifacts.extend(rows.iter().filter(|r| r.result.is_ok()).map(|r| member_dir(&dir, r.point.index)));
    if failed.is_empty() {
        CommandOutcome::ok(format!("{n} sweep points completed"), artifacts)
    } else {
        CommandOutcome::physics(
            format!("{} of {n} sweep points failed (marked in the aggregate):\n{}", failed.len(), failed.join("\n")),
            artifacts,
        )
    }
}

fn cmd_check_mr(args: CheckMrArgs) -> CommandOutcome {
    let stored = match load_run(&args.run) {
        Ok(s) => s,
        Err(e) => return CommandOutcome::usage(e.to_string()),
    };
    let grid = &stored.grid;
    let residual = residual_from_fluxes(&photon_flux_profile(grid), grid.kind);
    let max = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let stride = (residual.len() / 10).max(1);
    let mut lines = vec![format!("Manley-Rowe residual profile ({}):", grid.kind)];
    for (iz, r) in residual.iter().enumerate() {
        if iz % stride == 0 || iz + 1 == residual.len() {
            lines.push(format!("  z = {:.6e} m  residual = {r:+.3e}", grid.z[iz]));
        }
    }
    lines.push(format!(
        "max |residual| = {max:.3e} (threshold {MANLEY_ROWE_STRICT:e}, lossless run: {})",
        stored.lossless
    ));
    let summary = lines.join("\n");
    if max < MANLEY_ROWE_STRICT {
        CommandOutcome::ok(summary, Vec::new())
    } else {
        CommandOutcome::physics(summary, Vec::new())
    }
}

fn report(outcome: &CommandOutcome) {
    let to_stderr = outcome.code == 2;
    let mut text = outcome.summary.clone();
    for p in &outcome.artifacts {
        text.push_str(&format!("\nwrote {}", p.display()));
    }
    if to_stderr {
        eprintln!("{text}");
    } else {
        println!("{text}");
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Efficiency(a) => cmd_efficiency(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::CheckMr(a) => cmd_check_mr(a),
    };
    report(&outcome);
    ExitCode::from(outcome.code)
}
