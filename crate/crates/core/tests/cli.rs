use std::path::Path;
use std::process::Command;

use shape_dekf::cli::{run, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_OK, EXIT_SCHEMA, EXIT_THRESHOLD};
use shape_dekf::io;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["shape-dekf"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, name: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let (code, _, err) = call(&["simulate", "--out", p(&path), "--quiet"]);
    assert_eq!(code, EXIT_OK, "{err}");
    path
}

#[test]
fn simulate_default_writes_500_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let (code, out, _) = call(&["simulate", "--out", p(&path)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("n_samples: 500"));
    assert!(out.contains("seed: 42"));
    assert!(out.contains("w_true: ["));
    assert_eq!(io::load_dataset(&path).unwrap().len(), 500);
}

#[test]
fn simulate_is_deterministic_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "a.csv");
    let b = simulate(dir.path(), "b.csv");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let c = dir.path().join("c.csv");
    assert_eq!(
        call(&["simulate", "--seed", "7", "--out", p(&c), "--quiet"]).0,
        EXIT_OK
    );
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn missing_config_exits_2() {
    let (code, _, err) = call(&["simulate", "--config", "/definitely/not/here.toml"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("not/here.toml"), "{err}");
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "estimator.Qx = 1.0\n").unwrap();
    assert_eq!(call(&["simulate", "--config", p(&cfg)]).0, EXIT_CONFIG);
}

#[test]
fn simulate_output_feeds_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv");
    let est = dir.path().join("e.csv");
    let metrics = dir.path().join("m.json");
    let (code, out, err) = call(&[
        "estimate",
        "--dataset",
        p(&data),
        "--out",
        p(&est),
        "--metrics",
        p(&metrics),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("\"convergence\""));
    let rows = io::load_estimates(&est).unwrap();
    assert_eq!(rows.len(), 500);
    assert_eq!(rows[0].k, 1);
    let header = std::fs::read_to_string(&est).unwrap();
    assert!(header.starts_with(
        "k,x_hat,w_l,w_a1,w_a2,w_b1,w_b2,Px,Pw_diag_1,Pw_diag_2,Pw_diag_3,Pw_diag_4,Pw_diag_5,innov_px,innov_pz,innov_theta\n"
    ));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(json["ticks"], 500);
    assert!(json["summary"]["max_t_error"].is_number());
}

#[test]
fn malformed_row_exits_4_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv");
    let text = std::fs::read_to_string(&data).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[17] = "17,0.03,oops,1,1,1,1,1,0";
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let (code, _, err) = call(&[
        "estimate",
        "--dataset",
        p(&bad),
        "--out",
        p(&dir.path().join("e.csv")),
    ]);
    assert_eq!(code, EXIT_SCHEMA);
    assert!(err.contains("row 17"), "{err}");
}

#[test]
fn overflowing_process_noise_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv");
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "estimator.Qv = 1e300\n").unwrap();
    let est = dir.path().join("e.csv");
    let args = [
        "estimate",
        "--config",
        p(&cfg),
        "--dataset",
        p(&data),
        "--out",
        p(&est),
        "--quiet",
    ];
    assert_eq!(call(&args).0, EXIT_DIVERGENCE);
}

#[test]
fn validate_jacobians_exit_codes() {
    let (code, out, _) = call(&["validate-jacobians", "--trials", "100"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.matches(" ok").count(), 4, "{out}");
    assert_eq!(call(&["validate-jacobians", "--trials", "1"]).0, EXIT_OK);
    assert_eq!(
        call(&["validate-jacobians", "--trials", "3", "--flip-sign"]).0,
        EXIT_THRESHOLD
    );
    assert_eq!(
        call(&["validate-jacobians", "--trials", "0"]).0,
        EXIT_CONFIG
    );
}

#[test]
fn report_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[sim]\nn_samples = 120\n").unwrap();
    let out = dir.path().join("run");
    let (code, stdout, err) = call(&["report", "--config", p(&cfg), "--out", p(&out), "--quiet"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.is_empty());
    assert_eq!(
        io::load_dataset(&out.join("dataset.csv")).unwrap().len(),
        120
    );
    assert_eq!(
        io::load_estimates(&out.join("estimates.csv"))
            .unwrap()
            .len(),
        120
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(json["n_samples"], 120);
    assert!(json["summary"]["final_param_rel_error"].is_array());
}

#[test]
fn binary_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_shape-dekf"))
        .args(["simulate", "--quiet", "--out", p(&data)])
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(env!("CARGO_BIN_EXE_shape-dekf"))
        .args([
            "estimate",
            "--quiet",
            "--dataset",
            p(&data),
            "--out",
            p(&dir.path().join("e.csv")),
        ])
        .args(["--metrics", p(&dir.path().join("m.json"))])
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(env!("CARGO_BIN_EXE_shape-dekf"))
        .arg("--help")
        .output()
        .unwrap();
    assert!(status.status.success());
    let help = String::from_utf8(status.stdout).unwrap();
    for cmd in ["simulate", "estimate", "validate-jacobians", "report"] {
        assert!(help.contains(cmd), "{help}");
    }
}
