use std::fs;
use std::path::Path;

use spinwire::experiments::delta_sweeps;
use spinwire::manifest::RunManifest;
use spinwire::output::sha256_hex;
use spinwire::sweep::{checkpoint_path, CHECKPOINT_DIR};
use spinwire::{run_fit, run_ground_state, run_sweep, run_table1, table1_config, CellKey, SweepConfig};
use spinwire_core::{CellOutcome, CellSpec, Error, Protocol, ProtocolRegistry};

fn cfg_in(dir: &Path, protocol: &[&str], n: &[usize], delta: &[f64]) -> SweepConfig {
    let mut cfg = SweepConfig::new(protocol, n, delta);
    cfg.out = dir.to_path_buf();
    cfg
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn table1_is_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let reg = ProtocolRegistry::builtin();
    let mut cfg = table1_config(cfg_in(a.path(), &[], &[6, 8], &[0.7]));
    run_table1(&cfg, &reg).unwrap();
    cfg.out = b.path().to_path_buf();
    cfg.jobs = 3;
    run_table1(&cfg, &reg).unwrap();
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    assert!(fa.iter().any(|(n, _)| n == "table1.csv"));
    assert_eq!(fa, fb);

    let text = String::from_utf8(fs::read(a.path().join("table1.csv")).unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "protocol,n,delta,init,t_star,F_av,residual,ordered");
    assert_eq!(lines.count(), 6);
}

#[test]
fn manifest_digests_match_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = cfg_in(dir.path(), &["classical"], &[6], &[0.7]);
    let report = run_sweep(&cfg, "classical", &ProtocolRegistry::builtin()).unwrap();
    let m = RunManifest::load(dir.path()).unwrap();
    assert_eq!(m, report.manifest);
    assert!(m.stale_outputs(dir.path()).is_empty());
    let names: Vec<&str> = m.outputs.iter().map(|o| o.file.as_str()).collect();
    assert_eq!(names, ["series-classical.csv", "summary-classical.csv", "fig1a.csv", "fig1b.csv"]);
    for o in &m.outputs {
        assert_eq!(sha256_hex(&fs::read(dir.path().join(&o.file)).unwrap()), o.sha256);
    }
    assert!(m.started <= m.finished);
    assert_eq!(m.cells.len(), 1);
    assert!(m.cells[0].residual.unwrap() < 1e-9);
    assert_eq!(m.config["protocol"][0], "classical");

    fs::write(dir.path().join("fig1a.csv"), "tampered").unwrap();
    assert_eq!(m.stale_outputs(dir.path()), vec!["fig1a.csv".to_string()]);
}

#[test]
fn every_row_is_traceable() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cfg_in(dir.path(), &["quantum"], &[6], &[0.5, 0.7]);
    cfg.t_max = Some(4.0);
    cfg.dt = 0.5;
    run_sweep(&cfg, "quantum", &ProtocolRegistry::builtin()).unwrap();
    let text = fs::read_to_string(dir.path().join("series-quantum.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..5], ["protocol", "n", "delta", "init", "t"]);
    assert_eq!(*header.last().unwrap(), "residual");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 9);
    for r in &rows {
        assert_eq!(r.len(), header.len());
        assert_eq!(r[0], "quantum");
        assert_eq!(r[1], "6");
        // 12 significant digits.
        assert_eq!(r[4].split('e').next().unwrap().trim_start_matches('-').len(), 13);
    }
    assert_eq!(rows[0][2], "5.00000000000e-1");
    assert!(fs::metadata(dir.path().join("fig2b.csv")).is_ok());
}

#[test]
fn resumed_sweep_matches_uninterrupted_one() {
    let reg = ProtocolRegistry::builtin();
    let full = tempfile::tempdir().unwrap();
    let cfg = cfg_in(full.path(), &["quantum", "attach-fm"], &[6, 8], &[0.7]);
    run_sweep(&cfg, "sweep", &reg).unwrap();

    let part = tempfile::tempdir().unwrap();
    let first = cfg_in(part.path(), &["quantum"], &[6], &[0.7]);
    run_sweep(&first, "sweep", &reg).unwrap();
    let done = checkpoint_path(part.path(), &CellKey { protocol: "quantum".into(), n: 6, delta: 0.7 }, "gs");
    let stamp = fs::read(&done).unwrap();
    // An interrupted write leaves only a temporary file behind.
    fs::write(part.path().join(CHECKPOINT_DIR).join(".attach-fm-n8-d0.700000-gs.json.tmp-1"), "{").unwrap();

    let mut resumed_cfg = cfg.clone();
    resumed_cfg.out = part.path().to_path_buf();
    let report = run_sweep(&resumed_cfg, "sweep", &reg).unwrap();
    let resumed: Vec<bool> = report.manifest.cells.iter().map(|c| c.resumed).collect();
    assert_eq!(resumed, [true, false, false, false]);
    assert_eq!(fs::read(&done).unwrap(), stamp);
    assert_eq!(csv_files(full.path()), csv_files(part.path()));

    // A second pass recomputes nothing.
    let again = run_sweep(&resumed_cfg, "sweep", &reg).unwrap();
    assert!(again.manifest.cells.iter().all(|c| c.resumed));
    assert_eq!(csv_files(full.path()), csv_files(part.path()));
}

#[test]
fn stale_or_corrupt_checkpoints_are_recomputed() {
    let reg = ProtocolRegistry::builtin();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cfg_in(dir.path(), &["attach-afm"], &[6], &[0.7]);
    run_sweep(&cfg, "attach", &reg).unwrap();
    let path = checkpoint_path(dir.path(), &cfg.cells()[0], "gs");
    fs::write(&path, "not json").unwrap();
    let r = run_sweep(&cfg, "attach", &reg).unwrap();
    assert!(!r.manifest.cells[0].resumed);

    cfg.dt = 0.1;
    let r = run_sweep(&cfg, "attach", &reg).unwrap();
    assert!(!r.manifest.cells[0].resumed, "a different dt must not reuse the checkpoint");
}

struct FailsAtEight;

impl Protocol for FailsAtEight {
    fn name(&self) -> &'static str {
        "quantum"
    }

    fn description(&self) -> &'static str {
        "quantum protocol that refuses N = 8"
    }

    fn run(&self, cell: &CellSpec) -> spinwire_core::Result<CellOutcome> {
        if cell.n_qubits == 8 {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: 1.0,
            });
        }
        ProtocolRegistry::builtin().get("quantum")?.run(cell)
    }
}

#[test]
fn failed_cells_are_recorded_and_the_sweep_continues() {
    let mut reg = ProtocolRegistry::builtin();
    reg.register(Box::new(FailsAtEight));
    let dir = tempfile::tempdir().unwrap();
    let cfg = cfg_in(dir.path(), &["quantum"], &[6, 8, 10], &[0.7]);
    let report = run_sweep(&cfg, "quantum", &reg).unwrap();
    assert_eq!(report.failed().len(), 1);
    assert_eq!(report.manifest.cells[1].status, "error");
    assert!(report.manifest.cells[1].error.as_deref().unwrap().contains("did not converge"));
    assert_eq!(report.manifest.cells[2].status, "ok");

    let summary = fs::read_to_string(dir.path().join("summary-quantum.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[2].starts_with("quantum,8,7.00000000000e-1,gs,error,"));
    let fig = fs::read_to_string(dir.path().join("fig2a.csv")).unwrap();
    assert_eq!(fig.lines().count(), 3);

    // The failed cell is retried on the next run.
    let report = run_sweep(&cfg, "quantum", &ProtocolRegistry::builtin()).unwrap();
    assert!(report.failed().is_empty());
    assert_eq!(report.manifest.cells.iter().filter(|c| c.resumed).count(), 2);
}

#[test]
fn invalid_configs_fail_before_any_compute() {
    let reg = ProtocolRegistry::builtin();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cfg_in(&dir.path().join("never"), &["quantum"], &[6], &[0.7]);
    cfg.t_max = Some(0.0);
    let err = run_sweep(&cfg, "quantum", &reg).unwrap_err();
    assert!(err.to_string().contains("empty time grid"), "{err}");
    assert!(!dir.path().join("never").exists());

    assert!(SweepConfig::from_toml_str("protocol = \"quantum\"\nn = [6]\nwindow = 3\n").is_err());
    let unknown = SweepConfig::from_toml_str("protocol = \"quantum\"\nn = [6]\nseed = 1\n").unwrap_err();
    assert!(format!("{unknown:#}").contains("unknown field"), "{unknown:#}");
    let cfg = SweepConfig::from_toml_str("protocol = \"quantum\"\nn = []\n").unwrap();
    assert!(cfg.validate(&reg).is_err());
}

#[test]
fn config_file_drives_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let text = format!(
        "protocol = \"attach-fm\"\nn = [6, 8]\ndelta = [0.0]\ndt = 0.1\njobs = 2\nout = {:?}\n",
        out.display().to_string()
    );
    let path = dir.path().join("sweep.toml");
    fs::write(&path, text).unwrap();
    let cfg = SweepConfig::load(&path).unwrap();
    let report = run_sweep(&cfg, "sweep", &ProtocolRegistry::builtin()).unwrap();
    assert_eq!(report.records.len(), 2);
    let fm8 = report.records[1].data.as_ref().unwrap().summary_value("F_av").unwrap();
    assert!((fm8 - 0.7864).abs() < 2e-3, "{fm8}");
    assert!(out.join("summary-attach-fm.csv").exists());
}

#[test]
fn delta_sweep_flags_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = cfg_in(dir.path(), &["quantum"], &[8], &[0.5, 0.7, 0.99]);
    let report = run_sweep(&cfg, "quantum", &ProtocolRegistry::builtin()).unwrap();
    let sweeps = delta_sweeps(&report.records);
    assert_eq!(sweeps.len(), 1);
    assert_eq!(sweeps[0].exhausted_deltas(), vec![0.99]);
    assert!(matches!(sweeps[0].argmax, Some(d) if d == 0.5 || d == 0.7));
    let fig = fs::read_to_string(dir.path().join("fig2b.csv")).unwrap();
    assert_eq!(fig.lines().filter(|l| l.ends_with(",true,false")).count(), 1);
    assert_eq!(fig.lines().filter(|l| l.ends_with(",true")).count(), 1);
}

#[test]
fn ground_state_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = cfg_in(dir.path(), &[], &[8, 10], &[0.7]);
    let (m, t) = run_ground_state(&cfg).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert!(m.cells.iter().all(|c| c.status == "ok" && c.residual.unwrap() < 1e-9));
    let p: f64 = t.rows[1][7].parse().unwrap();
    assert!(p > 0.9 && p < 1.0, "{p}");
    assert!(dir.path().join("ground_state.csv").exists());
}

#[test]
fn fit_reads_a_run_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    fs::write(&csv, "n,F_av\n6,0.99\n8,0.98\n10,0.97\n12,\n14,0.95\n").unwrap();
    let (_, t) = run_fit(&csv, "n", "F_av", None, dir.path()).unwrap();
    assert_eq!(t.rows.len(), 4);
    let slope: f64 = t.rows[0][6].parse().unwrap();
    let intercept: f64 = t.rows[0][7].parse().unwrap();
    let crossing: f64 = t.rows[0][10].parse().unwrap();
    assert!((slope + 0.005).abs() < 1e-12);
    assert!((intercept - 1.02).abs() < 1e-12);
    assert!((crossing - (1.02 - 2.0 / 3.0) / 0.005).abs() < 1e-9);
    assert!(run_fit(&csv, "n", "missing", None, dir.path()).is_err());
}
