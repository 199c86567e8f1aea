//! Result tables built from finished cells: per-protocol series and summaries
//! plus the figure and table files.

use std::collections::BTreeSet;

use spinwire_core::protocol::quantum::CLASSICAL_THRESHOLD;
use spinwire_core::{fit_linear, LinearFit};

use crate::output::{format_float, format_opt, Table};
use crate::sweep::{CellData, CellRecord};

/// Rise below which a δ-sweep peak counts as window exhaustion.
pub const DELTA_SWEEP_MIN_RISE: f64 = 0.05;

/// δ from which `t*` is expected to grow monotonically.
pub const SLOW_TRANSFER_DELTA: f64 = 0.8;

const KEY: [&str; 4] = ["protocol", "n", "delta", "init"];

fn key_fields(r: &CellRecord) -> Vec<String> {
    vec![r.protocol.clone(), r.n.to_string(), format_float(r.delta), r.init.clone()]
}

fn header(extra: &[&str]) -> Vec<String> {
    KEY.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn ok_cells<'a>(records: &'a [CellRecord], protocol: &'a str) -> impl Iterator<Item = (&'a CellRecord, &'a CellData)> + 'a {
    records
        .iter()
        .filter(move |r| r.protocol == protocol)
        .filter_map(|r| r.data.as_ref().map(|d| (r, d)))
}

/// One row per grid time of every successful cell of `protocol`.
pub fn series_table(records: &[CellRecord], protocol: &str) -> anyhow::Result<Table> {
    let columns: Vec<String> = ok_cells(records, protocol).next().map(|(_, d)| d.columns.clone()).unwrap_or_default();
    let mut h = header(&["t"]);
    h.extend(columns.iter().cloned());
    h.push("residual".into());
    let mut t = Table::new(h);
    for (r, d) in ok_cells(records, protocol) {
        anyhow::ensure!(d.columns == columns, "{protocol} cells disagree on series columns");
        for (i, &time) in d.times.iter().enumerate() {
            let mut row = key_fields(r);
            row.push(format_float(time));
            row.extend(d.values.iter().map(|v| format_float(v[i])));
            row.push(format_float(d.residual));
            t.push(row)?;
        }
    }
    Ok(t)
}

/// One row per cell of `protocol`, failed cells included.
pub fn summary_table(records: &[CellRecord], protocol: &str) -> anyhow::Result<Table> {
    let keys: Vec<String> = ok_cells(records, protocol)
        .next()
        .map(|(_, d)| d.summary.iter().map(|(k, _)| k.clone()).filter(|k| k != "t_star").collect())
        .unwrap_or_default();
    let mut h = header(&["status", "t_star"]);
    h.extend(keys.iter().cloned());
    h.extend(
        ["peak_status", "window_exhausted", "residual", "norm_drift", "energy_drift", "error"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut t = Table::new(h);
    for r in records.iter().filter(|r| r.protocol == protocol) {
        let mut row = key_fields(r);
        row.push(r.status().to_string());
        match &r.data {
            Some(d) => {
                row.push(format_float(d.t_star));
                row.extend(keys.iter().map(|k| format_opt(d.summary_value(k))));
                row.push(d.peak_status.clone());
                row.push(d.window_exhausted.to_string());
                row.push(format_float(d.residual));
                row.push(format_float(d.norm_drift));
                row.push(format_float(d.energy_drift));
                row.push(String::new());
            }
            None => {
                row.extend(std::iter::repeat(String::new()).take(keys.len() + 6));
                row.push(r.error.clone().unwrap_or_default());
            }
        }
        t.push(row)?;
    }
    Ok(t)
}

fn distinct<T: Copy + PartialEq>(xs: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in xs {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Fit of `y(N)` over cells sharing one δ, when at least three N are present.
fn fit_over_n(cells: &[(&CellRecord, &CellData)], y: impl Fn(&CellData) -> f64) -> Option<LinearFit> {
    let x: Vec<f64> = cells.iter().map(|(r, _)| r.n as f64).collect();
    let v: Vec<f64> = cells.iter().map(|(_, d)| y(d)).collect();
    (x.len() >= 3).then(|| fit_linear(&x, &v).ok()).flatten()
}

/// Classical figures of merit against time.
pub fn fig1a(records: &[CellRecord]) -> anyhow::Result<Table> {
    let labels = ["F_I", "F_x", "F_y", "F_z", "holevo"];
    let mut t = Table::new(header(&["t", "F_I", "F_x", "F_y", "F_z", "C", "residual"]));
    for (r, d) in ok_cells(records, "classical") {
        let cols: Vec<&[f64]> = labels
            .iter()
            .map(|l| d.column(l).ok_or_else(|| anyhow::anyhow!("classical cell lacks column {l}")))
            .collect::<anyhow::Result<_>>()?;
        for (i, &time) in d.times.iter().enumerate() {
            let mut row = key_fields(r);
            row.push(format_float(time));
            row.extend(cols.iter().map(|c| format_float(c[i])));
            row.push(format_float(d.residual));
            t.push(row)?;
        }
    }
    Ok(t)
}

/// `C(t*)` and `t*` against N, with a linear fit of `t*(N)` per δ.
pub fn fig1b(records: &[CellRecord]) -> anyhow::Result<Table> {
    let mut t = Table::new(header(&[
        "t_star",
        "C",
        "residual",
        "t_star_fit_slope",
        "t_star_fit_intercept",
        "t_star_fit_r2",
    ]));
    let cells: Vec<_> = ok_cells(records, "classical").collect();
    for delta in distinct(cells.iter().map(|(r, _)| r.delta.to_bits())) {
        let group: Vec<_> = cells.iter().copied().filter(|(r, _)| r.delta.to_bits() == delta).collect();
        let fit = fit_over_n(&group, |d| d.t_star);
        for (r, d) in &group {
            let mut row = key_fields(r);
            row.push(format_float(d.t_star));
            row.push(format_opt(d.summary_value("capacity")));
            row.push(format_float(d.residual));
            row.push(format_opt(fit.as_ref().map(|f| f.slope)));
            row.push(format_opt(fit.as_ref().map(|f| f.intercept)));
            row.push(format_opt(fit.as_ref().map(|f| f.r_squared)));
            t.push(row)?;
        }
    }
    Ok(t)
}

/// `F_av(t*)` against N with the linear fit and its crossing of 2/3.
pub fn fig2a(records: &[CellRecord]) -> anyhow::Result<Table> {
    let mut t = Table::new(header(&[
        "t_star",
        "F_av",
        "residual",
        "fit_slope",
        "fit_intercept",
        "fit_r2",
        "fit_F_av",
        "threshold_crossing_n",
    ]));
    let cells: Vec<_> = ok_cells(records, "quantum").collect();
    for delta in distinct(cells.iter().map(|(r, _)| r.delta.to_bits())) {
        let group: Vec<_> = cells.iter().copied().filter(|(r, _)| r.delta.to_bits() == delta).collect();
        let fit = fit_over_n(&group, |d| d.summary_value("F_av").unwrap_or(f64::NAN));
        for (r, d) in &group {
            let mut row = key_fields(r);
            row.push(format_float(d.t_star));
            row.push(format_opt(d.summary_value("F_av")));
            row.push(format_float(d.residual));
            row.push(format_opt(fit.as_ref().map(|f| f.slope)));
            row.push(format_opt(fit.as_ref().map(|f| f.intercept)));
            row.push(format_opt(fit.as_ref().map(|f| f.r_squared)));
            row.push(format_opt(fit.as_ref().map(|f| f.predict(r.n as f64))));
            row.push(format_opt(fit.as_ref().and_then(|f| f.crossing(CLASSICAL_THRESHOLD))));
            t.push(row)?;
        }
    }
    Ok(t)
}

/// One δ of a δ-sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPoint {
    pub delta: f64,
    pub t_star: f64,
    pub fidelity: f64,
    pub residual: f64,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSweep {
    pub n: usize,
    pub init: String,
    /// Sorted by δ.
    pub points: Vec<DeltaPoint>,
    /// δ with the largest `F_av(t*)` among non-exhausted points.
    pub argmax: Option<f64>,
}

impl DeltaSweep {
    /// Whether `t*` strictly increases over the non-exhausted points with
    /// `δ >= from`.
    pub fn t_star_increasing_from(&self, from: f64) -> bool {
        let ts: Vec<f64> = self.points.iter().filter(|p| p.delta >= from && !p.exhausted).map(|p| p.t_star).collect();
        ts.windows(2).all(|w| w[1] > w[0])
    }

    pub fn exhausted_deltas(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.exhausted).map(|p| p.delta).collect()
    }
}

/// Quantum-protocol optimum against δ at fixed N, for every N that has at
/// least two δ values.
pub fn delta_sweeps(records: &[CellRecord]) -> Vec<DeltaSweep> {
    let cells: Vec<_> = ok_cells(records, "quantum").collect();
    let mut out = Vec::new();
    for n in distinct(cells.iter().map(|(r, _)| r.n)) {
        let mut points: Vec<DeltaPoint> = cells
            .iter()
            .filter(|(r, _)| r.n == n)
            .map(|(r, d)| DeltaPoint {
                delta: r.delta,
                t_star: d.t_star,
                fidelity: d.summary_value("F_av").unwrap_or(f64::NAN),
                residual: d.residual,
                exhausted: d.exhausted(DELTA_SWEEP_MIN_RISE),
            })
            .collect();
        if distinct(points.iter().map(|p| p.delta.to_bits())).len() < 2 {
            continue;
        }
        points.sort_by(|a, b| a.delta.total_cmp(&b.delta));
        let argmax = points
            .iter()
            .filter(|p| !p.exhausted)
            .fold(None::<&DeltaPoint>, |best, p| match best {
                Some(b) if b.fidelity >= p.fidelity => Some(b),
                _ => Some(p),
            })
            .map(|p| p.delta);
        let init = cells.iter().find(|(r, _)| r.n == n).map(|(r, _)| r.init.clone()).unwrap_or_default();
        out.push(DeltaSweep { n, init, points, argmax });
    }
    out
}

/// `F_av(t*)` and `t*` against δ with exhaustion flags and the argmax.
pub fn fig2b(records: &[CellRecord]) -> anyhow::Result<Table> {
    let mut t = Table::new(header(&["t_star", "F_av", "residual", "window_exhausted", "is_argmax"]));
    for s in delta_sweeps(records) {
        for p in &s.points {
            t.push(vec![
                "quantum".to_string(),
                s.n.to_string(),
                format_float(p.delta),
                s.init.clone(),
                format_float(p.t_star),
                format_float(p.fidelity),
                format_float(p.residual),
                p.exhausted.to_string(),
                (s.argmax == Some(p.delta)).to_string(),
            ])?;
        }
    }
    Ok(t)
}

/// Optimal fidelities of the three strategies at one N and δ.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    pub delta: f64,
    pub fm: (f64, f64),
    pub afm: (f64, f64),
    pub quantum: (f64, f64),
}

impl Table1Row {
    /// Quantum above AFM above FM.
    pub fn is_ordered(&self) -> bool {
        self.quantum.1 > self.afm.1 && self.afm.1 > self.fm.1
    }
}

/// Rows for every `(N, δ)` where all three strategies succeeded.
pub fn table1_rows(records: &[CellRecord]) -> Vec<Table1Row> {
    let find = |p: &str, n: usize, delta: f64| {
        ok_cells(records, p)
            .find(|(r, _)| r.n == n && r.delta == delta)
            .and_then(|(_, d)| d.summary_value("F_av").map(|f| (d.t_star, f)))
    };
    let mut out = Vec::new();
    for (r, _) in ok_cells(records, "quantum") {
        if let (Some(fm), Some(afm), Some(q)) = (
            find("attach-fm", r.n, r.delta),
            find("attach-afm", r.n, r.delta),
            find("quantum", r.n, r.delta),
        ) {
            out.push(Table1Row {
                n: r.n,
                delta: r.delta,
                fm,
                afm,
                quantum: q,
            });
        }
    }
    out
}

/// Strategy comparison in long form: one row per strategy and N.
pub fn table1(records: &[CellRecord]) -> anyhow::Result<Table> {
    let mut t = Table::new(header(&["t_star", "F_av", "residual", "ordered"]));
    for row in table1_rows(records) {
        for p in ["attach-fm", "attach-afm", "quantum"] {
            let Some((r, d)) = ok_cells(records, p).find(|(r, _)| r.n == row.n && r.delta == row.delta) else {
                continue;
            };
            let mut fields = key_fields(r);
            fields.push(format_float(d.t_star));
            fields.push(format_opt(d.summary_value("F_av")));
            fields.push(format_float(d.residual));
            fields.push(row.is_ordered().to_string());
            t.push(fields)?;
        }
    }
    Ok(t)
}

/// All files derived from a finished sweep, in emission order.
pub fn output_tables(records: &[CellRecord]) -> anyhow::Result<Vec<(String, Table)>> {
    let protocols: BTreeSet<&str> = records.iter().map(|r| r.protocol.as_str()).collect();
    let mut out = Vec::new();
    for p in &protocols {
        out.push((format!("series-{p}.csv"), series_table(records, p)?));
        out.push((format!("summary-{p}.csv"), summary_table(records, p)?));
    }
    let has = |p: &str| ok_cells(records, p).next().is_some();
    if has("classical") {
        out.push(("fig1a.csv".into(), fig1a(records)?));
        out.push(("fig1b.csv".into(), fig1b(records)?));
    }
    if has("quantum") {
        out.push(("fig2a.csv".into(), fig2a(records)?));
        let b = fig2b(records)?;
        if !b.is_empty() {
            out.push(("fig2b.csv".into(), b));
        }
    }
    let t1 = table1(records)?;
    if !t1.is_empty() {
        out.push(("table1.csv".into(), t1));
    }
    Ok(out)
}
