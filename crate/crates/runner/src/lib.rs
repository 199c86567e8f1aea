//! Sweep runner for spin-chain communication experiments.
//!
//! A run executes every `(protocol, N, δ)` cell of a [`SweepConfig`] on a
//! bounded thread pool, checkpoints each finished cell under `out/cells/`,
//! writes CSV tables and closes with `manifest.json`.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod output;
pub mod sweep;

use std::path::Path;

use anyhow::{bail, Context};
use rayon::prelude::*;
use spinwire_core::density::werner_p;
use spinwire_core::protocol::quantum::CLASSICAL_THRESHOLD;
use spinwire_core::reduce::partial_trace;
use spinwire_core::solver::ground_state_in_sector;
use spinwire_core::{build_chain, fit_linear, ChainSpec, ProtocolRegistry};

pub use config::{CellKey, SweepConfig};
pub use manifest::RunManifest;
pub use sweep::{CellData, CellRecord};

use output::{format_float, format_opt, read_table, Table};

/// Everything a finished sweep produced.
#[derive(Debug)]
pub struct SweepReport {
    pub manifest: RunManifest,
    pub records: Vec<CellRecord>,
}

impl SweepReport {
    pub fn failed(&self) -> Vec<&CellRecord> {
        self.records.iter().filter(|r| !r.is_ok()).collect()
    }
}

/// Runs (or resumes) a sweep and writes its tables and manifest into `cfg.out`.
pub fn run_sweep(cfg: &SweepConfig, command: &str, registry: &ProtocolRegistry) -> anyhow::Result<SweepReport> {
    cfg.validate(registry)?;
    let mut manifest = RunManifest::start(command, serde_json::to_value(cfg)?, cfg.fingerprint());
    let runs = sweep::run_cells(cfg, registry)?;
    manifest.cells = runs.iter().map(|r| r.manifest_entry()).collect();
    let records: Vec<CellRecord> = runs.into_iter().map(|r| r.record).collect();
    for (name, table) in experiments::output_tables(&records)? {
        manifest.emit(&cfg.out, &name, &table.to_bytes()?)?;
    }
    let manifest = manifest.finish(&cfg.out)?;
    Ok(SweepReport { manifest, records })
}

/// The three strategies of the comparison table at every N of `cfg`.
pub fn table1_config(mut cfg: SweepConfig) -> SweepConfig {
    cfg.protocol = vec!["attach-fm".into(), "attach-afm".into(), "quantum".into()];
    cfg
}

/// Runs the strategy comparison and fails if any N breaks the ordering
/// quantum > AFM > FM. The tables are written either way.
pub fn run_table1(cfg: &SweepConfig, registry: &ProtocolRegistry) -> anyhow::Result<SweepReport> {
    let report = run_sweep(cfg, "table1", registry)?;
    let rows = experiments::table1_rows(&report.records);
    if let Some(r) = rows.iter().find(|r| !r.is_ordered()) {
        bail!(
            "strategy ordering violated at N = {}: quantum {:.6}, AFM {:.6}, FM {:.6}",
            r.n,
            r.quantum.1,
            r.afm.1,
            r.fm.1
        );
    }
    Ok(report)
}

/// Ground-state energy, gap and Werner parameters of the end pairs for every
/// `(N, δ)` of `cfg`, written to `ground_state.csv`. A failed cell leaves its
/// numeric fields empty.
pub fn run_ground_state(cfg: &SweepConfig) -> anyhow::Result<(RunManifest, Table)> {
    cfg.validate_grid()?;
    let mut manifest = RunManifest::start("ground-state", serde_json::to_value(cfg)?, cfg.fingerprint());
    let cells: Vec<(usize, f64)> = cfg.n.iter().flat_map(|&n| cfg.delta.iter().map(move |&d| (n, d))).collect();
    let lanczos = cfg
        .cell_spec(&CellKey {
            protocol: "ground-state".into(),
            n: 0,
            delta: 0.0,
        })?
        .lanczos;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
    let results: Vec<anyhow::Result<(Vec<f64>, usize)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, delta)| {
                let h = build_chain(ChainSpec::dimerized(n, delta))?;
                let gs = ground_state_in_sector(&h, n / 2, &lanczos)?;
                let ends = werner_p(&partial_trace(&gs.state, &[1, 2])?)?;
                let receiver = werner_p(&partial_trace(&gs.state, &[n - 1, n])?)?;
                let values = vec![gs.energy, gs.gap, ends.p, ends.distance, receiver.p, receiver.distance, gs.residual];
                Ok((values, gs.matvecs))
            })
            .collect()
    });
    let mut table = Table::new([
        "protocol",
        "n",
        "delta",
        "init",
        "status",
        "energy",
        "gap",
        "werner_p_12",
        "werner_distance_12",
        "werner_p_receiver",
        "werner_distance_receiver",
        "residual",
        "matvecs",
        "error",
    ]);
    for ((n, delta), r) in cells.iter().zip(results) {
        let mut row = vec!["ground-state".to_string(), n.to_string(), format_float(*delta), "gs".to_string()];
        let mut entry = manifest::ManifestCell {
            protocol: "ground-state".into(),
            n: *n,
            delta: *delta,
            init: "gs".into(),
            status: "ok".into(),
            resumed: false,
            residual: None,
            norm_drift: None,
            energy_drift: None,
            matvecs: None,
            seconds: None,
            error: None,
        };
        match r {
            Ok((values, matvecs)) => {
                row.push("ok".into());
                row.extend(values.iter().map(|&v| format_float(v)));
                row.push(matvecs.to_string());
                row.push(String::new());
                entry.residual = values.last().copied();
                entry.matvecs = Some(matvecs);
            }
            Err(e) => {
                let msg = format!("{e:#}");
                eprintln!("ground-state: N={n} delta={delta} failed: {msg}");
                row.push("error".into());
                row.extend(std::iter::repeat(String::new()).take(8));
                row.push(msg.clone());
                entry.status = "error".into();
                entry.error = Some(msg);
            }
        }
        manifest.cells.push(entry);
        table.push(row)?;
    }
    manifest.emit(&cfg.out, "ground_state.csv", &table.to_bytes()?)?;
    Ok((manifest.finish(&cfg.out)?, table))
}

/// Least-squares line through columns `x` and `y` of a CSV file. Rows with an
/// empty or non-numeric field in either column are skipped. Writes `fit.csv`
/// into `out`: one row per point with the fitted value, plus the fit
/// parameters and the crossing of `threshold` on every row.
pub fn run_fit(input: &Path, x: &str, y: &str, threshold: Option<f64>, out: &Path) -> anyhow::Result<(RunManifest, Table)> {
    let src = read_table(input)?;
    let col = |name: &str| {
        src.header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("column {name:?} not in {} (have {:?})", input.display(), src.header))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for row in &src.rows {
        if let (Ok(a), Ok(b)) = (row[ix].parse::<f64>(), row[iy].parse::<f64>()) {
            xs.push(a);
            ys.push(b);
        }
    }
    let fit = fit_linear(&xs, &ys)?;
    let threshold = threshold.unwrap_or(CLASSICAL_THRESHOLD);
    let config = serde_json::json!({
        "input": input.display().to_string(),
        "x": x,
        "y": y,
        "threshold": threshold,
        "out": out.display().to_string(),
    });
    let mut manifest = RunManifest::start("fit", config, format!("{}|fit", env!("CARGO_PKG_VERSION")));
    let mut table = Table::new([
        "x_column",
        "y_column",
        "x",
        "y",
        "fitted",
        "fit_residual",
        "slope",
        "intercept",
        "r_squared",
        "threshold",
        "threshold_crossing",
    ]);
    for (k, (&a, &b)) in xs.iter().zip(&ys).enumerate() {
        table.push(vec![
            x.to_string(),
            y.to_string(),
            format_float(a),
            format_float(b),
            format_float(fit.predict(a)),
            format_float(fit.residuals[k]),
            format_float(fit.slope),
            format_float(fit.intercept),
            format_float(fit.r_squared),
            format_float(threshold),
            format_opt(fit.crossing(threshold)),
        ])?;
    }
    manifest.emit(out, "fit.csv", &table.to_bytes()?)?;
    Ok((manifest.finish(out)?, table))
}
