//! End-to-end runs: config in, report and artifacts out.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analytics::RunReport;
use crate::artifacts::{write_run_artifacts, ManifestInfo};
use crate::config::{RunConfig, SweepPoint};
use crate::error::{Error, Result};
use crate::propagation::{march_cell, MarchOutput};

pub struct Simulation {
    pub output: MarchOutput,
    pub report: RunReport,
    pub manifest: ManifestInfo,
    pub strict_mr: bool,
}

pub fn simulate(config: &RunConfig) -> Result<Simulation> {
    let resolved = config.resolve()?;
    let output = march_cell(&resolved.setup)?;
    let report = RunReport::build(&output, &resolved.setup.medium, resolved.beam_area, resolved.frozen())?;
    Ok(Simulation {
        output,
        report,
        manifest: ManifestInfo {
            config_hash: config.physics_hash(),
            lossless: resolved.setup.medium.is_lossless(),
            frozen_coherence: resolved.frozen(),
        },
        strict_mr: resolved.strict_mr,
    })
}

impl Simulation {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        write_run_artifacts(&self.output, &self.report, &self.manifest, dir)
    }
}

/// Outcome of one sweep member.
#[derive(Debug)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub result: Result<RunReport>,
}

pub const SWEEP_AGGREGATE_FILE: &str = "sweep.csv";

/// Directory of sweep member `index` below `out`.
pub fn member_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("run_{index:04}"))
}

/// Runs every point, `parallel` at a time, writing per-member artifacts
/// when `out` is given. Results keep the expansion order regardless of
/// scheduling.
pub fn run_sweep(points: Vec<SweepPoint>, parallel: usize, out: Option<&Path>) -> Result<Vec<SweepRow>> {
    let run_one = |point: SweepPoint| -> SweepRow {
        let result = simulate(&point.config).and_then(|sim| {
            if let Some(dir) = out {
                sim.write(&member_dir(dir, point.index))?;
            }
            Ok(sim.report)
        });
        SweepRow { point, result }
    };
    if parallel <= 1 {
        return Ok(points.into_iter().map(run_one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| Error::Sweep(format!("cannot start {parallel} workers: {e}")))?;
    Ok(pool.install(|| points.into_par_iter().map(run_one).collect()))
}

fn report_record(report: &RunReport) -> Result<(csv::StringRecord, csv::StringRecord)> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(report).map_err(|e| Error::Sweep(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::Sweep(e.to_string()))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header = r.headers().map_err(|e| Error::Sweep(e.to_string()))?.clone();
    let row = r
        .records()
        .next()
        .ok_or_else(|| Error::Sweep("empty report".into()))?
        .map_err(|e| Error::Sweep(e.to_string()))?;
    Ok((header, row))
}

/// Writes one row per member: index, sweep coordinates, status and the
/// report columns (empty for failed members).
pub fn write_sweep_aggregate(rows: &[SweepRow], path: &Path) -> Result<()> {
    let Some(first) = rows.first() else {
        return Err(Error::Sweep("no sweep rows to aggregate".into()));
    };
    let dummy = RunReport::default();
    let (report_header, _) = report_record(&dummy)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Sweep(format!("{}: {e}", path.display())))?;
    let mut header = vec!["index".to_string()];
    header.extend(first.point.coords.iter().map(|(p, _)| p.clone()));
    header.push("status".into());
    header.extend(report_header.iter().map(str::to_string));
    let wr = |w: &mut csv::Writer<std::fs::File>, rec: Vec<String>| {
        w.write_record(rec).map_err(|e| Error::Sweep(format!("{}: {e}", path.display())))
    };
    wr(&mut w, header)?;
    for row in rows {
        let mut rec = vec![row.point.index.to_string()];
        rec.extend(row.point.coords.iter().map(|(_, v)| format!("{v:.16e}")));
        match &row.result {
            Ok(report) => {
                rec.push("ok".into());
                rec.extend(report_record(report)?.1.iter().map(str::to_string));
            }
            Err(e) => {
                rec.push(format!("failed: {}", e.to_string().replace('\n', " ")));
                rec.extend(std::iter::repeat_n(String::new(), report_header.len()));
            }
        }
        wr(&mut w, rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
