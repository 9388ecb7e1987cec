//! Run artifacts on disk: `fields.csv`, `coherence.csv`, `report.csv` and a
//! flat `key = value` manifest.
//!
//! All numbers are SI and written with 17 significant digits so that a
//! reloaded grid reproduces the in-memory one bit for bit. Rows are z-major,
//! then τ.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analytics::RunReport;
use crate::error::{Error, Result};
use crate::propagation::{FieldGrid, MarchOutput};
use crate::quantum::{SchemeKind, C64};

pub const FIELDS_FILE: &str = "fields.csv";
pub const COHERENCE_FILE: &str = "coherence.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const FIELD_HEADER: [&str; 10] = [
    "z_m", "tau_s", "re_omega1", "im_omega1", "re_omega2", "im_omega2", "re_omega3", "im_omega3", "re_omega4",
    "im_omega4",
];
const COHERENCE_HEADER: [&str; 4] = ["z_m", "tau_s", "re_rho_bc", "im_rho_bc"];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::CorruptArtifact {
            path: path.to_path_buf(),
            reason: format!("{other:?}"),
        },
    }
}

fn write_grid_csv<const N: usize>(
    path: &Path,
    header: [&str; N],
    grid: &FieldGrid,
    row: impl Fn(usize) -> Vec<f64>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    let nt = grid.nt();
    for (iz, z) in grid.z.iter().enumerate() {
        for (it, tau) in grid.tau.iter().enumerate() {
            let mut rec = vec![num(*z), num(*tau)];
            rec.extend(row(iz * nt + it).into_iter().map(num));
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// What the manifest records beyond the grid itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestInfo {
    pub config_hash: String,
    pub lossless: bool,
    pub frozen_coherence: bool,
}

/// Writes the four artifacts into `dir` (created if needed) and returns the
/// manifest path.
pub fn write_run_artifacts(out: &MarchOutput, report: &RunReport, info: &ManifestInfo, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let grid = &out.grid;

    let fields_path = dir.join(FIELDS_FILE);
    write_grid_csv(&fields_path, FIELD_HEADER, grid, |i| {
        grid.fields[i].iter().flat_map(|w| [w.re, w.im]).collect()
    })?;
    let coherence_path = dir.join(COHERENCE_FILE);
    write_grid_csv(&coherence_path, COHERENCE_HEADER, grid, |i| {
        vec![out.coherence[i].re, out.coherence[i].im]
    })?;

    let report_path = dir.join(REPORT_FILE);
    let mut w = csv::Writer::from_path(&report_path).map_err(|e| csv_err(&report_path, e))?;
    w.serialize(report).map_err(|e| csv_err(&report_path, e))?;
    w.flush().map_err(|e| Error::io(&report_path, e))?;

    let fields_bytes = std::fs::read(&fields_path).map_err(|e| Error::io(&fields_path, e))?;
    let coherence_bytes = std::fs::read(&coherence_path).map_err(|e| Error::io(&coherence_path, e))?;

    let mut m: BTreeMap<String, String> = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    put("tool_version", TOOL_VERSION.to_string());
    put("config_hash", info.config_hash.clone());
    put("scheme", grid.kind.to_string());
    put(
        "signature",
        grid.kind.signature().iter().map(|s| if *s > 0.0 { "+" } else { "-" }).collect(),
    );
    put("nz_points", grid.z.len().to_string());
    put("nt", grid.nt().to_string());
    put("z_end_m", num(*grid.z.last().unwrap_or(&0.0)));
    put("tau_start_s", num(grid.tau[0]));
    put("tau_end_s", num(*grid.tau.last().unwrap_or(&0.0)));
    for a in 0..4 {
        put(&format!("carrier_{}_rad_per_s", a + 1), num(grid.carriers[a]));
        put(&format!("wavenumber_{}_per_m", a + 1), num(grid.wavenumbers[a]));
        put(&format!("dipole_{}_c_m", a + 1), num(grid.dipoles[a]));
    }
    put("phase_mismatch_per_m", num(grid.phase_mismatch));
    put("lossless", info.lossless.to_string());
    put("frozen_coherence", info.frozen_coherence.to_string());
    put("fields_sha256", sha256_hex(&fields_bytes));
    put("coherence_sha256", sha256_hex(&coherence_bytes));

    let manifest_path = dir.join(MANIFEST_FILE);
    let file = File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut w = BufWriter::new(file);
    for (k, v) in &m {
        writeln!(w, "{k} = {v}").map_err(|e| Error::io(&manifest_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

/// A run read back from disk.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub grid: FieldGrid,
    pub lossless: bool,
    pub manifest: BTreeMap<String, String>,
}

pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once(" = ").ok_or_else(|| Error::CorruptArtifact {
            path: path.to_path_buf(),
            reason: format!("line {} is not `key = value`", i + 1),
        })?;
        m.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(m)
}

/// Loads `fields.csv` and the manifest, verifying the recorded checksum
/// and the grid shape.
pub fn load_run(dir: &Path) -> Result<StoredRun> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = read_manifest(&manifest_path)?;
    let corrupt = |path: &Path, reason: String| Error::CorruptArtifact {
        path: path.to_path_buf(),
        reason,
    };
    let get = |k: &str| -> Result<&str> {
        manifest
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| corrupt(&manifest_path, format!("missing key `{k}`")))
    };
    let getf = |k: &str| -> Result<f64> {
        get(k)?
            .parse::<f64>()
            .map_err(|_| corrupt(&manifest_path, format!("`{k}` is not a number")))
    };
    let getu = |k: &str| -> Result<usize> {
        get(k)?
            .parse::<usize>()
            .map_err(|_| corrupt(&manifest_path, format!("`{k}` is not an integer")))
    };
    let kind = match get("scheme")? {
        s if s == SchemeKind::DoubleLambda.to_string() => SchemeKind::DoubleLambda,
        s if s == SchemeKind::LadderLambda.to_string() => SchemeKind::LadderLambda,
        other => return Err(corrupt(&manifest_path, format!("unknown scheme `{other}`"))),
    };
    let nz = getu("nz_points")?;
    let nt = getu("nt")?;
    let arr = |prefix: &str, suffix: &str| -> Result<[f64; 4]> {
        let mut v = [0.0; 4];
        for (a, slot) in v.iter_mut().enumerate() {
            *slot = getf(&format!("{prefix}_{}_{suffix}", a + 1))?;
        }
        Ok(v)
    };
    let carriers = arr("carrier", "rad_per_s")?;
    let wavenumbers = arr("wavenumber", "per_m")?;
    let dipoles = arr("dipole", "c_m")?;
    let phase_mismatch = getf("phase_mismatch_per_m")?;
    let lossless = get("lossless")? == "true";

    let fields_path = dir.join(FIELDS_FILE);
    let bytes = std::fs::read(&fields_path).map_err(|e| Error::io(&fields_path, e))?;
    if sha256_hex(&bytes) != get("fields_sha256")? {
        return Err(corrupt(&fields_path, "checksum does not match the manifest".into()));
    }
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let header = rdr.headers().map_err(|e| csv_err(&fields_path, e))?;
    if header.iter().ne(FIELD_HEADER.iter().copied()) {
        return Err(corrupt(&fields_path, "unexpected header".into()));
    }
    let mut z = Vec::with_capacity(nz);
    let mut tau = Vec::with_capacity(nt);
    let mut fields = Vec::with_capacity(nz * nt);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(&fields_path, e))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| corrupt(&fields_path, format!("non-numeric value in row {}", i + 2)))?;
        if vals.len() != FIELD_HEADER.len() || vals.iter().any(|v| !v.is_finite()) {
            return Err(corrupt(&fields_path, format!("malformed row {}", i + 2)));
        }
        let (iz, it) = (i / nt.max(1), i % nt.max(1));
        if it == 0 {
            z.push(vals[0]);
        } else if vals[0] != z[iz] {
            return Err(corrupt(&fields_path, format!("row {} breaks z-major order", i + 2)));
        }
        if iz == 0 {
            tau.push(vals[1]);
        } else if tau.get(it) != Some(&vals[1]) {
            return Err(corrupt(&fields_path, format!("row {} has an inconsistent tau", i + 2)));
        }
        fields.push([0, 1, 2, 3].map(|a| C64::new(vals[2 + 2 * a], vals[3 + 2 * a])));
    }
    if fields.len() != nz * nt || z.len() != nz || tau.len() != nt {
        return Err(corrupt(
            &fields_path,
            format!("expected {} rows, found {}", nz * nt, fields.len()),
        ));
    }
    let grid = FieldGrid {
        kind,
        z,
        tau,
        fields,
        carriers,
        wavenumbers,
        dipoles,
        phase_mismatch,
    };
    grid.validate_axes().map_err(|e| corrupt(&fields_path, e.to_string()))?;
    Ok(StoredRun {
        grid,
        lossless,
        manifest,
    })
}

/// Reads the single row of `report.csv`.
pub fn read_report(path: &Path) -> Result<RunReport> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut rows = rdr.deserialize::<RunReport>();
    let first = rows
        .next()
        .ok_or_else(|| Error::CorruptArtifact {
            path: path.to_path_buf(),
            reason: "no report row".into(),
        })?
        .map_err(|e| csv_err(path, e))?;
    if rows.next().is_some() {
        return Err(Error::CorruptArtifact {
            path: path.to_path_buf(),
            reason: "more than one report row".into(),
        });
    }
    Ok(first)
}
