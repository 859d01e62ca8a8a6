use std::path::PathBuf;
use std::process::{Command, Output};

fn ntca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntca")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ntca-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn block_encode_check_reports_spectrum() {
    let v = scratch("v.json", "[[0.6, 0], [0, 0.8]]");
    for kind in ["real", "imag"] {
        let out = ntca(&["block-encode", "--input", s(&v), "--kind", kind, "--check"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(j["contains_targets"], true);
        assert_eq!(j["queries"]["u"], 2);
    }
    let csv = scratch("v.csv", "re,im\n0.6,0\n0.8,0\n");
    assert_eq!(ntca(&["block-encode", "--input", s(&csv), "--check"]).status.code(), Some(0));
}

#[test]
fn phases_then_check() {
    let v = scratch("w.json", "[[0.6, 0], [0.8, 0]]");
    let be = scratch("be.json", "");
    let poly = scratch("t3.json", r#"{"chebyshev": [[0,0],[0,0],[0,0],[0.5,0]]}"#);
    let phases = scratch("phases.json", "");
    assert_eq!(ntca(&["block-encode", "--input", s(&v), "--emit", s(&be)]).status.code(), Some(0));
    assert_eq!(ntca(&["qsvt", "phases", "--poly", s(&poly), "--emit", s(&phases)]).status.code(), Some(0));
    let out = ntca(&["qsvt", "check", "--be", s(&be), "--phases", s(&phases)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(j["residual"].as_f64().unwrap() <= j["error_bound"].as_f64().unwrap());
}

#[test]
fn poly_fit_methods() {
    for method in ["taylor", "chebyshev"] {
        let out = ntca(&["poly", "fit", "--fn", "tanh", "--eps", "1e-3", "--method", method]);
        assert_eq!(out.status.code(), Some(0));
        let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(j["certified_error"].as_f64().unwrap() <= 1e-3);
    }
    assert_eq!(ntca(&["poly", "fit", "--fn", "relu", "--eps", "1e-3"]).status.code(), Some(2));
}

#[test]
fn ntca_run_and_exit_codes() {
    let v = scratch("n.json", "[[0.6, 0], [0.8, 0]]");
    let p = scratch("p.json", r#"{"monomial": [[0,0],[1,0]]}"#);
    let out = ntca(&["ntca", "run", "--input", s(&v), "--poly-p", s(&p), "--amplify", "auto"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((j["fidelity_vs_target"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let zero = scratch("z.json", r#"{"monomial": [[0,0]]}"#);
    assert_eq!(ntca(&["ntca", "run", "--input", s(&v), "--poly-p", s(&zero)]).status.code(), Some(3));
    assert_eq!(ntca(&["ntca", "run", "--input", s(&v), "--poly-p", s(&p), "--variant", "half"]).status.code(), Some(2));
    let bad = scratch("bad.json", r#"{"monomial": [[0,0]], "colour": 1}"#);
    assert_eq!(ntca(&["ntca", "run", "--input", s(&v), "--poly-p", s(&bad)]).status.code(), Some(2));
}

#[test]
fn sweep_emits_csv() {
    let out = ntca(&["sweep", "--sizes", "2,4,8", "--degrees", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    let zero = ntca(&["sweep", "--sizes", "2", "--activation", "zero"]);
    assert_eq!(zero.status.code(), Some(0));
    assert!(String::from_utf8(zero.stdout).unwrap().contains("UNAMPLIFIABLE"));
}

#[test]
fn run_config_writes_report() {
    let report = scratch("report.json", "");
    let cfg = scratch(
        "cfg.json",
        &format!(
            r#"{{"schema_version": 1, "seed": 1, "task": "BLOCK_ENCODE", "params": {{"input": [[1,0],[0,0]]}}, "output": "{}"}}"#,
            s(&report)
        ),
    );
    let out = ntca(&["run", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(j["passed"], true);
    let old = scratch("old.json", r#"{"schema_version": 0, "task": "NTCA", "params": {}}"#);
    assert_eq!(ntca(&["run", "--config", s(&old)]).status.code(), Some(2));
}

#[test]
fn qnn_run_with_readout() {
    let v = scratch("q.json", "[[0.5, 0], [0.5, 0], [0.5, 0], [0.5, 0]]");
    let swap = "[[[0,0],[1,0],[0,0],[0,0]],[[1,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]],[[0,0],[0,0],[1,0],[0,0]]]";
    let layers = scratch("layers.json", &format!(r#"[{{"weights": {swap}, "width": 4, "p": "x2"}}]"#));
    let out = ntca(&["qnn", "run", "--input", s(&v), "--layers", s(&layers), "--readout", "estimate:0.05"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["nodes"].as_array().unwrap().len(), 4);
}
