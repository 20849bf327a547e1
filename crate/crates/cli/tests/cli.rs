use std::path::Path;
use std::process::{Command, Output};

fn edgetail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgetail")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn airy_json_has_versioned_rows() {
    let v = json(&edgetail(&["airy", "--which", "upper", "--x", "-3,0", "--T", "2"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "airy");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for key in ["x", "T", "value", "imag_residual", "contour_case", "nodes_used"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn classical_airy_at_zero() {
    let v = json(&edgetail(&["airy", "--which", "classical", "--x", "0"]));
    let ai0 = v["value"].as_f64().unwrap();
    assert!((ai0 - 0.355_028_053_887_817_2).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["--bogus"][..],
        &["airy", "--which", "upper", "--x", "0", "--T", "-1"],
        &["airy", "--which", "upper", "--x", "0", "--T", "0"],
        &["sweep", "--T", "8,-1", "--s", "8"],
        &["sweep", "--T", "8", "--s", "1:0:1"],
        &["tail", "--T", "8", "--s", "8", "--mu-delta", "-1"],
        &[],
    ] {
        let out = edgetail(args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let out = edgetail(&["--config", cfg.to_str().unwrap(), "selftest"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let out = edgetail(&["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn dumped_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = edgetail(&["--dump-config", "--det-tol", "1e-9", "--jobs", "1"]);
    assert!(first.status.success());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, &first.stdout).unwrap();
    let second = edgetail(&["--config", cfg.to_str().unwrap(), "--dump-config"]);
    assert_eq!(first.stdout, second.stdout);

    let direct = edgetail(&["--det-tol", "1e-9", "det", "--airy-kernel", "--s", "-1"]);
    let via_file = edgetail(&["--config", cfg.to_str().unwrap(), "det", "--airy-kernel", "--s", "-1"]);
    assert!(direct.status.success());
    assert_eq!(direct.stdout, via_file.stdout);
}

fn write_sweep(path: &Path) {
    let out = edgetail(&["sweep", "--T", "8,64", "--s", "8:13:1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    write_sweep(&path);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,T,tail,err"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.len() == 4 && r[2] > 0.0 && r[3] >= 0.0));
}

#[test]
fn fit_writes_json_and_gnuplot_data() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    write_sweep(&csv);
    let out_json = dir.path().join("fit.json");
    let out = edgetail(&["fit", "--input", csv.to_str().unwrap(), "--out", out_json.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_json).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    for key in ["c1", "c2", "c3"] {
        assert!(v[key].as_f64().unwrap() > 0.0, "{key}");
    }
    let dat = std::fs::read_to_string(dir.path().join("fit.dat")).unwrap();
    assert!(dat.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).count() >= 12);
}

#[test]
fn fit_rejects_single_time() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    let out = edgetail(&["sweep", "--T", "8", "--s", "8:13:1", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let fit = edgetail(&["fit", "--input", csv.to_str().unwrap(), "--gnuplot", dir.path().join("x.dat").to_str().unwrap()]);
    assert_eq!(fit.status.code(), Some(2));
}
