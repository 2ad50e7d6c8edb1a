use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_modschwarz"));
    c.env_remove("MODSCHWARZ_CACHE_DIR");
    c
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), parse(&out))
}

fn parse(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or(Value::Null)
}

#[test]
fn solve_n1() {
    let (code, doc) = run(&["solve", "--n", "1"]);
    assert_eq!(code, 0);
    let x = doc["xs"][0].as_f64().unwrap();
    assert!((x - 4.0 / 7.0).abs() < 1e-12);
    assert_eq!(doc["poly"]["rational_coeffs"], serde_json::json!(["1", "-4/7"]));
}

#[test]
fn solve_n0_is_trivial() {
    let (code, doc) = run(&["solve", "--n", "0"]);
    assert_eq!(code, 0);
    assert_eq!(doc["xs"], serde_json::json!([]));
    assert_eq!(doc["pass"], Value::Bool(true));
}

#[test]
fn solve_from_given_start() {
    let (code, doc) = run(&["solve", "--n", "2", "--init", "0.3,0.6"]);
    assert_eq!(code, 0);
    assert_eq!(doc["poly"]["rational_coeffs"], serde_json::json!(["1", "-20/19", "40/247"]));
    let (code, _) = run(&["solve", "--n", "2", "--init", "0.6,0.3"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_n0_exact_is_byte_identical() {
    let args = ["verify", "schwarzian", "--n", "0", "--mode", "exact", "--order", "25"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc = parse(&a);
    assert_eq!(doc["max_abs_deviation"], Value::String("0".into()));
    assert_eq!(doc["pass"], Value::Bool(true));
}

#[test]
fn verify_exact_from_rational_polynomial() {
    let (code, doc) = run(&["verify", "ode", "--n", "2", "--mode", "exact", "--order", "5", "--auto-solve"]);
    assert_eq!(code, 0);
    assert_eq!(doc["max_abs_deviation"], Value::String("0".into()));
}

#[test]
fn failed_verification_exits_4() {
    let (code, doc) = run(&["verify", "schwarzian", "--n", "1", "--xs", "1/2", "--order", "3"]);
    assert_eq!(code, 4);
    assert_eq!(doc["pass"], Value::Bool(false));
    let (code, doc) = run(&["residue", "--n", "1", "--xs", "0.5"]);
    assert_eq!(code, 4);
    assert!(doc["max_abs_residue"].as_f64().unwrap() > 1e-3);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        &["verify", "schwarzian", "--n", "-1"][..],
        &["verify", "schwarzian", "--order", "0"],
        &["solve", "--n", "1", "--tol", "0"],
        &["equivariance", "--gamma", "1,1,1,1"],
        &["expand", "quotient", "--quotient", "eta(x)"],
        &["report-all", "--criterion", "11"],
        &["solve", "--bogus"],
    ] {
        let out = bin().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_3() {
    let (code, _) = run(&["solve", "--n", "10", "--tol", "1e-300"]);
    assert_eq!(code, 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 2\nmode = \"float\"\norder = 10\n").unwrap();
    let (code, doc) = run(&["--config", cfg.to_str().unwrap(), "verify", "ode"]);
    assert_eq!(code, 0);
    assert_eq!(doc["n"], 2);
    // y_2 has lead -2 - 24*2
    assert_eq!(doc["trunc"], -2 - 24 * 2 + 24 * 10 + 1);
    let (_, doc) = run(&["--config", cfg.to_str().unwrap(), "verify", "ode", "--n", "1"]);
    assert_eq!(doc["n"], 1);
    std::fs::write(&cfg, "n = \"two\"\n").unwrap();
    let (code, _) = run(&["--config", cfg.to_str().unwrap(), "solve"]);
    assert_eq!(code, 2);
}

#[test]
fn cache_hits_are_reverified() {
    let dir = tempfile::tempdir().unwrap();
    let solve = || {
        let out = bin().env("MODSCHWARZ_CACHE_DIR", dir.path()).args(["solve", "--n", "3"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        parse(&out)
    };
    let first = solve();
    assert_eq!(first["cached"], Value::Bool(false));
    let second = solve();
    assert_eq!(second["cached"], Value::Bool(true));
    assert_eq!(first["poly"], second["poly"]);
    let entry = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let mut stored: Value = serde_json::from_str(&std::fs::read_to_string(&entry).unwrap()).unwrap();
    stored["refined_xs"][1] = Value::String("0.5".into());
    std::fs::write(&entry, stored.to_string()).unwrap();
    assert_eq!(solve()["cached"], Value::Bool(false));
}

#[test]
fn output_file_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.json");
    let status = bin()
        .args(["--output", out.to_str().unwrap(), "--plot", "--plot-dir", dir.path().to_str().unwrap(), "solve", "--n", "2"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let png = doc["plots"][0].as_str().unwrap();
    assert!(Path::new(png).exists());
    assert!(std::fs::read(png).unwrap().starts_with(b"\x89PNG"));
}

#[test]
fn expand_dump_format() {
    let (code, doc) = run(&["expand", "eta", "--order", "2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["mode"], "exact");
    assert_eq!(doc["lead"], 1);
    let recs = doc["records"].as_array().unwrap();
    let pairs: Vec<(i64, &str)> = recs.iter().map(|r| (r["exponent"].as_i64().unwrap(), r["value"].as_str().unwrap())).collect();
    assert_eq!(pairs, [(1, "1"), (25, "-1"), (49, "-1")]);
    let (_, doc) = run(&["expand", "quotient", "--quotient", "eta(1/2)^8/eta(1)^4", "--order", "1"]);
    assert_eq!(doc["quotient"]["holomorphic_at_infinity"], Value::Bool(true));
    assert_eq!(doc["records"][1]["value"], "-8");
}

#[test]
fn equivariance_constant() {
    let (code, doc) = run(&["equivariance", "--n", "0", "--gamma", "1,1,0,1", "--tau", "-0.2,0.9", "--tau", "0.1,1.1", "--tau", "0.3,1.4"]);
    assert_eq!(code, 0);
    assert!(doc["report"]["max_abs_deviation"].as_f64().unwrap() < 1e-6);
}

#[test]
fn report_all_single_criterion() {
    let out = bin().args(["report-all", "--criterion", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc = parse(&out);
    assert_eq!(doc["criteria"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));
}
