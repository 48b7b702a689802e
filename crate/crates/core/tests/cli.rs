use std::process::Command;

use robust_drm::cli::run;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("robust-drm").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn symmetric_rvar_sup() {
    let v = json(&["bound", "-d", "rvar:0.9,0.99", "--class", "symmetric", "--side", "sup"]);
    assert_eq!(v["value"].as_f64().unwrap(), 2.236067977);
    assert_eq!(v["attainable"], Value::Bool(true));
    assert_eq!(v["bracket"], Value::Null);
}

#[test]
fn location_and_scale_flags() {
    let v = json(&["bound", "-d", "tvar:0.75", "--mu", "-1", "--sigma", "2", "--side", "sup"]);
    assert!((v["value"].as_f64().unwrap() - (-1.0 + 2.0 * 3f64.sqrt())).abs() < 1e-9);
}

#[test]
fn identity_is_the_mean_on_both_sides() {
    let v = json(&["bound", "-d", "identity", "--class", "us", "--mu", "1.5"]);
    for side in ["sup", "inf"] {
        assert_eq!(v[side]["value"].as_f64().unwrap(), 1.5);
        assert_eq!(v[side]["degenerate"], Value::Bool(true));
    }
}

#[test]
fn sweep_tvar_unimodal() {
    let (code, out, err) = call(&["sweep", "-d", "tvar", "--class", "unimodal", "--alpha", "0.05:0.95:0.05"]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("alpha,sup,inf,method"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').take(3).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 19);
    for r in rows {
        let a = r[0];
        let want = if a < 0.5 {
            (a * (8.0 / 9.0 - a)).sqrt() / (1.0 - a)
        } else {
            (8.0 / (9.0 * (1.0 - a)) - 1.0).sqrt()
        };
        assert!((r[1] - want).abs() < 1e-8, "α = {a}: {} vs {want}", r[1]);
    }
}

#[test]
fn extremal_csv() {
    let (code, out, _) = call(&["extremal", "-d", "tvar:0.75", "--class", "unimodal", "--grid", "10"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("p,q"));
    let qs: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(qs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["bound", "-d", "tvar:1.5"][..],
        &["bound", "-d", "nonsense"],
        &["bound", "-d", "tvar:0.5", "--sigma", "0"],
        &["bound", "-d", "tvar:0.5", "--class", "bimodal"],
        &["sweep", "-d", "tvar", "--alpha", "0.9:0.1:0.1"],
        &["frobnicate"],
    ] {
        let (code, _, err) = call(args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("bound"));
}

#[test]
fn config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"command": "bound", "distortion": "tvar:0.75", "class": "general", "side": "sup"}"#,
    )
    .unwrap();
    let v = json(&["--config", path.to_str().unwrap()]);
    assert!((v["value"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-9);

    std::fs::write(&path, r#"{"command": "bound", "colour": "red"}"#).unwrap();
    assert_eq!(call(&["--config", path.to_str().unwrap()]).0, 2);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let (code, out, _) = call(&["bound", "-d", "var:0.9", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("side,value,method,attainable,lower,upper\n"));
}

#[test]
fn verify_small_budget() {
    let v = json(&["verify", "-d", "tvar:0.75", "--class", "unimodal", "--budget", "400"]);
    assert_eq!(v["cases"], 2);
    assert_eq!(v["violations"], 0);
}

#[test]
fn output_is_byte_stable() {
    let args = ["verify", "-d", "ph:0.8,0.75", "--class", "us", "--budget", "300", "--seed", "7"];
    assert_eq!(call(&args).1, call(&args).1);
    let args = ["sweep", "-d", "rvar:0.99", "--class", "unimodal", "--alpha", "0.1:0.9:0.1"];
    assert_eq!(call(&args).1, call(&args).1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_robust-drm");
    let ok = Command::new(bin).args(["bound", "-d", "var:0.9"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).args(["bound", "-d", "var:0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}
