use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SMALL_SAMPLER: &str = "[sampler]\ngrid = 5\nrandom = 4\nseed = 3\n";

fn nmheom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmheom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{SMALL_SAMPLER}{body}")).unwrap();
    path.to_string_lossy().into_owned()
}

fn single(dir: &TempDir, body: &str, out: &str) -> Value {
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join(out);
    let res = nmheom(&["single", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn single_run_outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let body = "[bath]\ndelta = 0.5\n[coupling]\nchi = 0.5\n[propagator]\nt_c = 10.0\n";
    single(&dir, body, "a");
    single(&dir, body, "b");
    for file in ["summary.json", "trajectory.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between runs");
    }
    let runtime: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/runtime.json")).unwrap())
            .unwrap();
    assert!(runtime["runtime_seconds"].as_f64().unwrap() >= 0.0);

    let csv = fs::read_to_string(dir.path().join("a/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,rho_ee,re_rho_eg,im_rho_eg,d_optimal_pair"
    );
    assert_eq!(lines.count(), 2001);
    assert!(!csv.contains("NaN") && !csv.contains("inf"));
}

#[test]
fn summary_records_depth_verdict_and_key_order() {
    let dir = TempDir::new().unwrap();
    let s = single(&dir, "[propagator]\nt_c = 5.0\n", "out");
    let raw = fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    let pos = |k: &str| raw.find(&format!("\"{k}\"")).unwrap();
    assert!(pos("nonmarkovianity") < pos("best_theta") && pos("best_phi") < pos("depth"));
    assert_eq!(s["depth"]["converged"], Value::Bool(true));
    assert!(s["depth"]["residual"].as_f64().unwrap() < s["depth"]["tolerance"].as_f64().unwrap());
    assert_eq!(s["pairs_evaluated"], 29);
    assert_eq!(s["seed"], 3);
}

#[test]
fn decoupled_bath_gives_zero() {
    let dir = TempDir::new().unwrap();
    let s = single(&dir, "[bath]\ngamma0 = 0.0\ndelta = 1.0\n", "out");
    assert!(s["nonmarkovianity"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn rotating_wave_examples() {
    let dir = TempDir::new().unwrap();
    let resonant = single(&dir, "[coupling]\nchi = 0.0\n", "resonant");
    assert_eq!(resonant["nonmarkovianity"].as_f64().unwrap(), 0.0);
    let detuned = single(
        &dir,
        "[coupling]\nchi = 0.0\n[bath]\ndelta = 1.0\n",
        "detuned",
    );
    assert!(detuned["nonmarkovianity"].as_f64().unwrap() > 0.0);
    assert_eq!(detuned["best_theta"].as_f64().unwrap(), 0.0);
    assert_eq!(detuned["best_phi"].as_f64().unwrap(), 0.0);
}

#[test]
fn sweep_is_ordered_and_independent_of_worker_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[propagator]\nt_c = 10.0\n[sweep]\naxis = \"delta\"\nunit = \"lambda\"\nvalues = [4, 0, 2]\nchi = [0.0, 1.0]\nstatistics = [\"bose\", \"fermi\"]\n",
    );
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        let res = nmheom(&[
            "sweep",
            "--config",
            &cfg,
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        outputs.push(fs::read_to_string(out.join("sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let mut reader = csv::Reader::from_reader(outputs[0].as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "axis",
            "value",
            "chi",
            "statistics",
            "nonmarkovianity",
            "best_theta",
            "best_phi",
            "depth",
            "error"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    let keys: Vec<(f64, f64, String)> = rows
        .iter()
        .map(|r| {
            (
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
                r[3].to_string(),
            )
        })
        .collect();
    assert_eq!(keys[0], (4.0, 0.0, "bose".into()));
    assert_eq!(keys[3], (4.0, 1.0, "fermi".into()));
    assert_eq!(keys[4].0, 0.0);
    for r in &rows {
        let n: f64 = r[4].parse().unwrap();
        assert!(n >= 0.0 && n.is_finite());
        assert!(r[8].is_empty());
    }
}

#[test]
fn sweep_flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[propagator]\nt_c = 5.0\n");
    let out = dir.path().join("out");
    let res = nmheom(&[
        "sweep",
        "--config",
        &cfg,
        "--axis",
        "gamma0",
        "--values",
        "0,0.01",
        "--chi",
        "0.25",
        "--statistics",
        "fermi",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows
        .iter()
        .all(|r| r.starts_with("gamma0,") && r.contains(",2.5000000000000000e-1,fermi,")));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    for body in [
        "[coupling]\nchi = 1.5\n",
        "[bath]\nlambda = -1.0\n",
        "[bath]\nunknown = 1\n",
        "not toml [",
    ] {
        let cfg = write_config(dir.path(), body);
        let res = nmheom(&[
            "single",
            "--config",
            &cfg,
            "--out",
            dir.path().join("x").to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(2), "{body}");
    }
    let res = nmheom(&["sweep", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn divergence_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[bath]\nepsilon = 100.0\n[propagator]\ndt = 0.1\nt_c = 20.0\ndepth = 2\n",
    );
    let res = nmheom(&[
        "single",
        "--config",
        &cfg,
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("epsilon=100"));
}

#[test]
fn divergent_sweep_points_are_recorded_not_fatal() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[bath]\nepsilon = 100.0\n[propagator]\ndt = 0.1\nt_c = 20.0\ndepth = 2\n[sweep]\naxis = \"gamma0\"\nvalues = [0.0, 0.02]\n",
    );
    let out = dir.path().join("out");
    let res = nmheom(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert!(rows
        .iter()
        .any(|r| r[4].is_empty() && r[8].contains("diverge")));
}

#[test]
fn io_errors_exit_with_four() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = write_config(dir.path(), "[propagator]\nt_c = 1.0\n");
    let res = nmheom(&[
        "single",
        "--config",
        &cfg,
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
    let res = nmheom(&[
        "single",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = nmheom_cli::ExperimentConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        count += 1;
    }
    assert!(count >= 4);
}
