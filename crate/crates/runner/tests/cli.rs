use std::fs;
use std::process::Command;

fn spinwire() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinwire"))
}

#[test]
fn quantum_subcommand_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinwire()
        .args(["quantum", "--n", "6,8", "--delta", "0.7", "--dt", "0.1", "--jobs", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["series-quantum.csv", "summary-quantum.csv", "fig2a.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "quantum");
    assert_eq!(m["config"]["dt"], 0.1);
    assert_eq!(m["cells"].as_array().unwrap().len(), 2);
}

#[test]
fn config_flag_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "protocol = [\"attach-afm\"]\nn = [6, 8]\ndt = 0.1\ninit = \"gs\"\n").unwrap();
    let out = spinwire()
        .args(["sweep", "--n", "6", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("summary-attach-afm.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);

    fs::write(&cfg, "protocol = \"quantum\"\nn = [6]\nmystery = 1\n").unwrap();
    let out = spinwire().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn bad_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinwire()
        .args(["classical", "--n", "6", "--t-max=0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty time grid"));

    let out = spinwire().args(["quantum", "--init", "neel"]).output().unwrap();
    assert!(!out.status.success());

    let out = spinwire().args(["sweep", "--n", "6"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn ground_state_and_fit_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinwire()
        .args(["ground-state", "--n", "6,8,10", "--delta", "0.7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let gs = dir.path().join("ground_state.csv");
    let out = spinwire()
        .args(["fit", "--x", "n", "--y", "energy", "--input"])
        .arg(&gs)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("slope "));
    assert_eq!(fs::read_to_string(dir.path().join("fit.csv")).unwrap().lines().count(), 4);
}
