use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tfet_negf::device::{load_config, reference_config};
use tfet_negf::io::Table;

fn tfet_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfet-sim")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Coarse two-point sweep of the reference device.
fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("device.toml");
    let text = reference_config(10.0) + "\n[solver]\nmesh_spacing = 2.0\nkane = { a = 4e14, b = 1.9e7, gamma = 2.5 }\n\n[sweep]\nvg = [0.4, 1.0]\nvd = [0.1]\n";
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    let help = tfet_sim(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("--mesh-spacing"));
    assert_eq!(code(&tfet_sim(&["--config"])), 1);
    assert_eq!(code(&tfet_sim(&["--config", "x.toml", "--frobnicate"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let bad_plot = tfet_sim(&["--config", s(&cfg), "--out", s(&dir.path().join("o")), "--plot", "surface"]);
    assert_eq!(code(&bad_plot), 1);
    assert!(String::from_utf8_lossy(&bad_plot.stderr).contains("transmission"));
    assert_eq!(code(&tfet_sim(&["--config", s(&cfg), "--threads", "0"])), 1);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&tfet_sim(&["--config", s(&dir.path().join("missing.toml")), "--out", s(&out)])), 2);

    let typo = dir.path().join("typo.toml");
    std::fs::write(&typo, reference_config(10.0) + "\n[solver]\nalpah = 0.5\n").unwrap();
    let o = tfet_sim(&["--config", s(&typo), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpah"));

    let cfg = small_config(dir.path());
    let o = tfet_sim(&["--config", s(&cfg), "--out", s(&out), "--set", "solver.alpha=1.5"]);
    assert_eq!(code(&o), 2);
    let o = tfet_sim(&["--config", s(&cfg), "--out", s(&out), "--backend", "magic"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn reference_sweep_has_sixteen_points() {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml")).unwrap();
    let cfg = load_config(&text).unwrap();
    let points = cfg.sweep.points();
    assert_eq!(points.len(), 16);
    assert_eq!(points[0], (0.0, 0.1));
    assert_eq!(points[15], (1.5, 0.1));
}

#[test]
fn outputs_round_trip_and_rerun_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["--config", s(&cfg), "--out", s(&out), "--dump-fields", "--threads", "2"];
        for kind in ["iv", "transmission", "bands", "barrier", "wkb"] {
            args.extend(["--plot", kind]);
        }
        let o = tfet_sim(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a");
    let b = run("b");

    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["bias_points"].as_array().unwrap().len(), 2);
    let files: Vec<String> = manifest["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap().to_string()).collect();
    for kind in ["trace_", "fields_", "transmission_", "bands_", "barrier_", "wkb_"] {
        assert_eq!(files.iter().filter(|f| f.starts_with(kind)).count(), 2, "{kind}");
    }
    assert!(files.contains(&"plot_iv.csv".to_string()));

    // the copied config reloads to the same hash
    let copy = load_config(&std::fs::read_to_string(a.join("config.toml")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], copy.hash());

    for f in &files {
        let bytes = std::fs::read(a.join(f)).unwrap();
        if f.ends_with(".csv") {
            let text = String::from_utf8(bytes.clone()).unwrap();
            let table = Table::parse(&text).unwrap();
            assert_eq!(table.to_text().unwrap(), text, "{f}");
            assert_eq!(table.meta_value("config_hash"), manifest["config_hash"].as_str(), "{f}");
        }
        // wall-clock seconds differ between runs
        if f != "manifest.json" {
            assert_eq!(bytes, std::fs::read(b.join(f)).unwrap(), "{f} differs between runs");
        }
    }

    let iv = Table::read(&a.join("iv_curve.csv")).unwrap();
    assert_eq!(iv.rows.len(), 2);
    assert_eq!(iv.numbers("vg_V").unwrap(), vec![0.4, 1.0]);
    let current = iv.numbers("current_A_per_nm").unwrap();
    assert!(current[1] > current[0] && current[0] >= 0.0);
    let fields = Table::read(&a.join("fields_vg1.000_vd0.100.csv")).unwrap();
    assert!(fields.column("G_cm-3_s-1").is_some());
}
