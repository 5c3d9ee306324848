use std::process::{Command, Output};

use serde_json::Value;
use toeplitz_lab::bergman::{toeplitz_truncation, MCParams, TruncatedOperator};
use toeplitz_lab::symbols::parse_symbol;

const PHASE_A: &str = r#"phase: [{"alpha":[1,0,0],"beta":[1,0,0],"coef":[1,0]}]"#;
const PHASE_B: &str = r#"phase: [{"alpha":[1,0,0],"beta":[0,1,0],"coef":[0.5,0]},{"alpha":[0,1,0],"beta":[1,0,0],"coef":[0.5,0]}]"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toeplitz-lab"))
        .args(args)
        .env_remove("TOEPLITZ_LAB_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn moment_map_examples() {
    let v = json(&run(&["moment-map", "--point", "0, 0, 0", "--format", "json"]));
    assert_eq!(v["torus"], serde_json::json!([0.0, 0.0]));
    assert_eq!(v["so2"], 0.0);

    let v = json(&run(&["moment-map", "--point", "0.5, 0, 0", "--format", "json"]));
    assert_eq!(v["n"], 3);
    assert_eq!(v["torus"][0].as_f64().unwrap(), 0.0);
    assert!((v["torus"][1].as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-15);
    assert!((v["so2"].as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-15);

    let o = run(&["moment-map", "--point", "0.5, 0.5i, 0"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("POINT_NOT_IN_DOMAIN"));
    assert!(stderr(&o).contains("2|z|^2"));
}

#[test]
fn moment_map_infers_dimension() {
    let o = run(&["moment-map", "--point", "0.1+0.2i, -0.1i, 0.3, 0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("component,value\n"));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(run(&["moment-map", "--n", "3", "--point", "0, 0, 0, 0"]).status.code(), Some(2));
    assert_eq!(run(&["moment-map", "--point", "0, zero, 0"]).status.code(), Some(2));
}

#[test]
fn eigenvalues_of_unit_symbol() {
    let o = run(&["eigenvalues", "--symbol", "moment: 1", "--kmax", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = toeplitz_lab::spectral::read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| (r.value - 1.0).abs() < 1e-12 && r.n == 3 && r.lambda == 4.0));
}

#[test]
fn eigenvalue_methods_agree() {
    let args = |m: &'static str| ["eigenvalues", "--symbol", "moment: exp(s)", "--kmax", "2", "--samples", "200000", "--method", m, "--format", "json"];
    let q = json(&run(&args("quad")));
    let b = json(&run(&args("bergman_mc")));
    assert!(q["code_version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    let (q, b) = (q["rows"].as_array().unwrap(), b["rows"].as_array().unwrap());
    assert_eq!(q.len(), b.len());
    for (x, y) in q.iter().zip(b) {
        let err = y["error"].as_f64().unwrap();
        assert!(err > 0.0);
        assert!((x["value"].as_f64().unwrap() - y["value"].as_f64().unwrap()).abs() < 4.0 * err);
    }
}

#[test]
fn parse_and_config_errors_exit_2() {
    let o = run(&["eigenvalues", "--symbol", "moment: exp(s"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position 13"));
    assert_eq!(run(&["eigenvalues", "--symbol", "moment: u"]).status.code(), Some(2));
    assert_eq!(run(&["eigenvalues", "--symbol", PHASE_A]).status.code(), Some(2));
    assert_eq!(run(&["eigenvalues", "--symbol", "moment: 1", "--lambda", "2"]).status.code(), Some(2));
    assert_eq!(run(&["eigenvalues", "--symbol", "moment: 1", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["eigenvalues", "--symbol", "moment: 1", "--method", "simpson"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn commutator_verdicts() {
    let common = ["--samples", "50000", "--degree", "2", "--format", "json"];
    let same = json(&run(&[&["commutator", "--symbol-a", "moment: exp(s)", "--symbol-b", "moment: exp(s)"][..], &common].concat()));
    assert_eq!(same["value"], 0.0);
    assert_eq!(same["verdict"], "CONSISTENT_WITH_ZERO");

    let moments = json(&run(&[&["commutator", "--symbol-a", "moment: exp(s)", "--symbol-b", "moment: s/(1+s^2)"][..], &common].concat()));
    assert_eq!(moments["verdict"], "CONSISTENT_WITH_ZERO");

    let phases = json(&run(&[&["commutator", "--symbol-a", PHASE_A, "--symbol-b", PHASE_B][..], &common].concat()));
    assert_eq!(phases["verdict"], "NONZERO");
    assert!(phases["value"].as_f64().unwrap() > 10.0 * phases["noise"].as_f64().unwrap());
}

#[test]
fn toeplitz_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("op.json");
    let o = run(&["toeplitz", "--symbol", "moment: 1", "--samples", "20000", "--degree", "2", "--seed", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["report"]["off_block_flagged"].as_array().unwrap().is_empty());
    assert!(v["report"]["identity_max_ratio"].as_f64().unwrap() < 5.0);
    let op: TruncatedOperator = serde_json::from_value(v["operator"].clone()).unwrap();
    let params = MCParams::new(3, 4.0, 20000, 7).unwrap();
    let direct = toeplitz_truncation(&parse_symbol("moment: 1").unwrap(), 2, &params).unwrap();
    assert_eq!(op, direct);
}

#[test]
fn toeplitz_exp_symbol_is_block_diagonal() {
    let v = json(&run(&["toeplitz", "--symbol", "moment: exp(s)", "--samples", "50000", "--degree", "3"]));
    assert!(v["report"]["off_block_flagged"].as_array().unwrap().is_empty());
    assert_eq!(v["report"]["block_means"].as_array().unwrap().len(), 6);
}

#[test]
fn runs_are_deterministic() {
    let args = ["eigenvalues", "--symbol", "moment: 1/(1-s)", "--kmax", "2", "--samples", "30000", "--seed", "11", "--method", "mc_cone"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"n": 4, "lambda": 6.5, "kmax": 1, "output": "json"}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let v = json(&run(&["eigenvalues", "--config", c, "--symbol", "moment: 1"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["n"], 4);
    assert_eq!(rows[0]["lambda"], 6.5);
    let v = json(&run(&["eigenvalues", "--config", c, "--lambda", "5", "--symbol", "moment: 1"]));
    assert_eq!(v["rows"][0]["lambda"], 5.0);

    std::fs::write(&cfg, r#"{"n": 4, "colour": "blue"}"#).unwrap();
    assert_eq!(run(&["info", "--config", c]).status.code(), Some(2));
}

#[test]
fn gram_uses_cache_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_toeplitz-lab"))
        .args(["gram", "--samples", "3000", "--degree", "2"])
        .env("TOEPLITZ_LAB_CACHE", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["table"]["degree_max"], 2);
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "--suite", "jordan"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count() >= 6);

    let o = run(&["verify", "--suite", "moment", "--format", "json"]);
    let v = json(&o);
    let checks = v["checks"].as_array().unwrap();
    for n in [3, 4, 5] {
        assert!(checks.iter().any(|c| c["name"] == format!("Hamiltonian residual n={n}") && c["pass"] == true));
    }

    let o = run(&["verify", "--suite", "all", "--tolerance-scale", "0", "--samples", "20000"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!stdout(&o).lines().any(|l| l.starts_with("PASS")));
}
