//! Cell execution with per-cell checkpoints.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spinwire_core::{CellOutcome, PeakStatus, ProtocolRegistry};

use crate::config::{CellKey, SweepConfig};
use crate::manifest::ManifestCell;
use crate::output::write_atomic;

pub const CHECKPOINT_DIR: &str = "cells";

/// Numbers produced by one successful cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellData {
    pub t_star: f64,
    pub peak_value: f64,
    /// `interior`, `boundary` or `no-signal`.
    pub peak_status: String,
    /// Rise of the peak above the window start.
    pub peak_rise: f64,
    pub window_exhausted: bool,
    pub summary: Vec<(String, f64)>,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    /// One vector per column.
    pub values: Vec<Vec<f64>>,
    pub residual: f64,
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub matvecs: usize,
}

impl CellData {
    fn from_outcome(o: &CellOutcome) -> Self {
        let times = o.series.first().map(|s| s.times.clone()).unwrap_or_default();
        CellData {
            t_star: o.peak.time,
            peak_value: o.peak.value,
            peak_status: match o.peak.status {
                PeakStatus::Interior => "interior",
                PeakStatus::AtBoundary => "boundary",
                PeakStatus::NoSignal => "no-signal",
            }
            .to_string(),
            peak_rise: o.peak.rise,
            window_exhausted: o.window_exhausted,
            summary: o.summary.clone(),
            columns: o.series.iter().map(|s| s.label.clone()).collect(),
            times,
            values: o.series.iter().map(|s| s.values.clone()).collect(),
            residual: o.residual,
            norm_drift: o.diagnostics.norm_drift,
            energy_drift: o.diagnostics.energy_drift,
            matvecs: o.diagnostics.matvecs,
        }
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == label).map(|k| self.values[k].as_slice())
    }

    /// Window exhausted under a stricter rule: boundary peak, no signal, or a
    /// rise below `min_rise`.
    pub fn exhausted(&self, min_rise: f64) -> bool {
        self.peak_status != "interior" || self.peak_rise < min_rise
    }
}

/// Result of one cell, successful or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub protocol: String,
    pub n: usize,
    pub delta: f64,
    pub init: String,
    pub fingerprint: String,
    pub data: Option<CellData>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CellRecord {
    pub fn is_ok(&self) -> bool {
        self.data.is_some()
    }

    pub fn status(&self) -> &'static str {
        if self.is_ok() {
            "ok"
        } else {
            "error"
        }
    }
}

/// A record and whether it came from a checkpoint.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub record: CellRecord,
    pub resumed: bool,
}

impl CellRun {
    pub fn manifest_entry(&self) -> ManifestCell {
        let r = &self.record;
        let d = r.data.as_ref();
        ManifestCell {
            protocol: r.protocol.clone(),
            n: r.n,
            delta: r.delta,
            init: r.init.clone(),
            status: r.status().to_string(),
            resumed: self.resumed,
            residual: d.map(|d| d.residual),
            norm_drift: d.map(|d| d.norm_drift),
            energy_drift: d.map(|d| d.energy_drift),
            matvecs: d.map(|d| d.matvecs),
            seconds: Some(r.seconds),
            error: r.error.clone(),
        }
    }
}

pub fn checkpoint_path(out: &Path, key: &CellKey, init: &str) -> PathBuf {
    out.join(CHECKPOINT_DIR).join(format!("{}.json", key.stem(init)))
}

fn load_checkpoint(path: &Path, fingerprint: &str) -> Option<CellRecord> {
    let text = std::fs::read_to_string(path).ok()?;
    let rec: CellRecord = serde_json::from_str(&text).ok()?;
    (rec.fingerprint == fingerprint).then_some(rec)
}

fn run_cell(cfg: &SweepConfig, registry: &ProtocolRegistry, key: &CellKey) -> CellRecord {
    let start = Instant::now();
    let result = (|| -> anyhow::Result<CellData> {
        let spec = cfg.cell_spec(key)?;
        let outcome = registry.get(&key.protocol)?.run(&spec)?;
        Ok(CellData::from_outcome(&outcome))
    })();
    let (data, error) = match result {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(format!("{e:#}"))),
    };
    CellRecord {
        protocol: key.protocol.clone(),
        n: key.n,
        delta: key.delta,
        init: cfg.init.clone(),
        fingerprint: cfg.fingerprint(),
        data,
        error,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs or resumes every cell of `cfg` on a pool of `cfg.jobs` threads.
///
/// Finished cells are checkpointed under `out/cells/`. A checkpoint is
/// reused when its fingerprint matches; failed cells are retried. Records come
/// back in [`SweepConfig::cells`] order.
pub fn run_cells(cfg: &SweepConfig, registry: &ProtocolRegistry) -> anyhow::Result<Vec<CellRun>> {
    cfg.validate(registry)?;
    let dir = cfg.out.join(CHECKPOINT_DIR);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let fingerprint = cfg.fingerprint();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
    let keys = cfg.cells();
    pool.install(|| {
        keys.par_iter()
            .map(|key| -> anyhow::Result<CellRun> {
                let path = checkpoint_path(&cfg.out, key, &cfg.init);
                if let Some(record) = load_checkpoint(&path, &fingerprint).filter(CellRecord::is_ok) {
                    return Ok(CellRun { record, resumed: true });
                }
                let record = run_cell(cfg, registry, key);
                match &record.error {
                    None => eprintln!("{}: N={} delta={} done in {:.2}s", key.protocol, key.n, key.delta, record.seconds),
                    Some(e) => eprintln!("{}: N={} delta={} failed: {e}", key.protocol, key.n, key.delta),
                }
                write_atomic(&path, serde_json::to_string(&record)?.as_bytes())?;
                Ok(CellRun { record, resumed: false })
            })
            .collect()
    })
}
