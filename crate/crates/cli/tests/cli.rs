use std::path::Path;
use std::process::{Command, Output};

use geompert_cli::document::ModelDocument;
use geompert_cli::parse_model;

fn geompert(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_geompert"));
    cmd.args(args).env_remove("GEOMPERT_GAP_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn export(name: &str, dir: &Path) -> String {
    let out = geompert(&["models", "export", name], &[]);
    assert_eq!(out.status.code(), Some(0));
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

fn write_model(dir: &Path, file: &str, text: &str) -> String {
    let path = dir.join(file);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// `diag(1, 1 + δ) + q σₓ`
fn near_degenerate(delta: f64) -> String {
    format!(
        r#"{{"name":"near","dim":2,"terms":[{{"order":0,"matrix":[[[1,0],[0,0]],[[0,0],[{},0]]]}},{{"order":1,"matrix":[[[0,0],[1,0]],[[1,0],[0,0]]]}}]}}"#,
        1.0 + delta
    )
}

#[test]
fn models_list_names_builtins() {
    let out = geompert(&["models", "list"], &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["toy-sec5", "hermitian-2level", "random-linear-N4-seed7"] {
        assert!(text.contains(name));
    }
    assert_eq!(geompert(&["models", "export", "nope"], &[]).status.code(), Some(2));
}

#[test]
fn exported_models_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in geompert::models::BUILTIN_NAMES {
        let path = export(name, dir.path());
        let doc = parse_model(&std::fs::read(&path).unwrap()).unwrap();
        let again = parse_model(doc.to_json().as_bytes()).unwrap();
        assert_eq!(doc, again);
        let direct = ModelDocument::from_builtin(&geompert::models::builtin(name).unwrap());
        assert_eq!(doc, direct);
    }
}

#[test]
fn expand_writes_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let model = export("toy-sec5", dir.path());
    let out_dir = dir.path().join("out");
    let out = geompert(&["expand", "--model", &model, "--order", "3", "--gauge", "zero-diag", "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let series = std::fs::read_to_string(out_dir.join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next(), Some("n,k,re,im"));
    // state 1 continues from +h; its second-order coefficient is +1/2
    let row = series.lines().find(|l| l.starts_with("1,2,")).unwrap();
    let re: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((re - 0.5).abs() < 1e-10);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["gauge"], "zero-diag");
    assert!(!out_dir.join(".report.json.partial").exists());
}

#[test]
fn verify_is_deterministic_and_passes_on_builtins() {
    let dir = tempfile::tempdir().unwrap();
    for name in geompert::models::BUILTIN_NAMES {
        let model = export(name, dir.path());
        let a = geompert(&["verify", "--model", &model, "--order", "3"], &[]);
        let b = geompert(&["verify", "--model", &model, "--order", "3"], &[]);
        assert_eq!(a.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn hermitian_model_reports_reduction_check() {
    let dir = tempfile::tempdir().unwrap();
    let model = export("hermitian-2level", dir.path());
    let out = geompert(&["verify", "--model", &model, "--order", "3"], &[]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let check = report["verification"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "hermitian_reduction")
        .unwrap();
    assert_eq!(check["passed"], true);
}

#[test]
fn degenerate_model_fails_at_eigenframe_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "deg.json", &near_degenerate(0.0));
    let out_dir = dir.path().join("out");
    let out = geompert(&["expand", "--model", &model, "--order", "2", "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("eigenframe") && err.contains("degenerate"), "{err}");
    assert!(!out_dir.exists());
}

#[test]
fn gap_tolerance_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "near.json", &near_degenerate(1e-7));
    let out_dir = dir.path().join("o");
    let args = ["expand", "--model", &model, "--order", "1", "--out", out_dir.to_str().unwrap()];
    assert_ne!(geompert(&args, &[]).status.code(), Some(4));
    assert_eq!(geompert(&args, &[("GEOMPERT_GAP_TOL", "1e-6")]).status.code(), Some(4));
    assert_eq!(geompert(&args, &[("GEOMPERT_GAP_TOL", "abc")]).status.code(), Some(3));
    assert_eq!(geompert(&args, &[("GEOMPERT_GAP_TOL", "-1")]).status.code(), Some(3));
}

#[test]
fn input_errors_use_input_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("empty.json", r#"{"name":"x","dim":1,"terms":[]}"#, "$.terms"),
        ("rect.json", r#"{"name":"x","dim":2,"terms":[{"order":0,"matrix":[[[1,0],[0,0]],[[0,0],[1,0]],[[0,0],[0,0]]]}]}"#, "3x2"),
        ("inf.json", r#"{"name":"x","dim":1,"terms":[{"order":0,"matrix":[[[1e999,0]]]}]}"#, "non-finite"),
        ("bad.json", "{", "invalid JSON"),
    ];
    for (file, text, needle) in cases {
        let model = write_model(dir.path(), file, text);
        let out = geompert(&["verify", "--model", &model, "--order", "2"], &[]);
        assert_eq!(out.status.code(), Some(3), "{file}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(needle), "{file}");
    }
    let missing = geompert(&["verify", "--model", "/nonexistent/model.json", "--order", "2"], &[]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let model = export("toy-sec5", dir.path());
    assert_eq!(geompert(&["verify", "--model", &model], &[]).status.code(), Some(2));
    assert_eq!(geompert(&["verify", "--model", &model, "--order", "0"], &[]).status.code(), Some(2));
    assert_eq!(geompert(&["verify", "--model", &model, "--order", "2", "--points", "5"], &[]).status.code(), Some(2));
    assert_eq!(geompert(&["verify", "--model", &model, "--order", "2", "--q-lo", "0"], &[]).status.code(), Some(2));
    assert_eq!(geompert(&["expand", "--model", &model, "--order", "2", "--gauge", "other", "--out", "x"], &[]).status.code(), Some(2));
    assert_eq!(geompert(&["sweep", "--model", &model, "--q-max", "0.1", "--points", "1", "--out", "x"], &[]).status.code(), Some(2));
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let model = export("hermitian-2level", dir.path());
    let out_dir = dir.path().join("s");
    let out = geompert(&["sweep", "--model", &model, "--q-max", "0.4", "--points", "5", "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "q,n,re,im,residual");
    assert_eq!(rows.len(), 1 + 5 * 2);
    for row in &rows[1..] {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        let exact = if f[1] == 0.0 { 1.0 - (1.0 + f[0] * f[0]).sqrt() } else { 1.0 + (1.0 + f[0] * f[0]).sqrt() };
        assert!((f[2] - exact).abs() < 1e-12 && f[3] == 0.0);
        // first omitted term of 1 ∓ √(1+q²) is ±q⁴/8
        assert!(f[4] <= 0.125 * f[0].powi(4) + 1e-15);
    }
}
