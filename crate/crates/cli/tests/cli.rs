use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn solh() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_solh"));
    c.env_remove("SOLH_DEPTH").env_remove("SOLH_MEAN_T");
    c
}

fn run(args: &[&str]) -> Output {
    solh().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn term(re: f64, im: f64, num: i64, den: i64) -> Value {
    json!({"coeff": {"re": re, "im": im}, "q": {"num": num, "den": den}})
}

fn spec(terms: Vec<Value>) -> Value {
    json!({ "terms": terms })
}

fn five_terms() -> Value {
    spec(vec![
        term(2.0, 0.0, 1, 1),
        term(0.0, 3.0, 1, 2),
        term(-1.0, 0.5, -5, 3),
        term(0.7071067811865476, -0.1, 7, 12),
        term(0.0, -0.4, 0, 1),
    ])
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn entry_map(report: &Value) -> Vec<(String, f64, f64)> {
    report["spectrum"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                format!("{}/{}", e["q"]["num"], e["q"]["den"]),
                e["coeff"]["re"].as_f64().unwrap(),
                e["coeff"]["im"].as_f64().unwrap(),
            )
        })
        .collect()
}

#[test]
fn analyze_reads_off_the_spectrum() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &spec(vec![term(2.0, 0.0, 1, 1), term(0.0, 3.0, 1, 2)]));
    let r = stdout_json(&run(&["analyze", s(&p)]));
    assert_eq!(entry_map(&r), [("1/2".into(), 0.0, 3.0), ("1/1".into(), 2.0, 0.0)]);
    assert_eq!(r["parseval"]["gap"], 0.0);
    assert!(r["invariance_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["config"]["tower_depth"], 16);
}

#[test]
fn analyze_empty_spec() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &spec(vec![]));
    let r = stdout_json(&run(&["analyze", s(&p)]));
    assert!(r["spectrum"]["entries"].as_array().unwrap().is_empty());
    assert_eq!(r["parseval"]["gap"], 0.0);
}

#[test]
fn analyze_shallow_tower_is_a_precision_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &spec(vec![term(1.0, 0.0, 1, 17)]));
    let o = run(&["--depth", "8", "analyze", s(&p)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("requires tower depth ≥ 17"));
    let o = solh().env("SOLH_DEPTH", "8").args(["analyze", s(&p)]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(run(&["--depth", "17", "analyze", s(&p)]).status.success());
}

#[test]
fn malformed_spec_reports_json_pointer() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &json!({"terms": [{"coeff": {"re": 1.0, "im": 0.0}, "q": {"num": 1, "den": 0}}]}));
    let o = run(&["analyze", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/terms/0/q"), "{}", String::from_utf8_lossy(&o.stderr));
    let q = dir.path().join("broken.json");
    std::fs::write(&q, "{\"terms\": [").unwrap();
    assert_eq!(run(&["analyze", s(&q)]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn csv_output_layout() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &spec(vec![term(2.0, 0.0, 1, 1), term(0.0, 3.0, 1, 2)]));
    let o = run(&["--format", "csv", "analyze", s(&p)]);
    let text = String::from_utf8(o.stdout).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["q_num,q_den,coeff_re,coeff_im,abs", "1,2,0e0,3e0,3e0", "1,1,2e0,0e0,2e0"]);
    assert!(text.starts_with("# solh analyze depth=16"));
}

#[test]
fn synth_round_trip_and_truncation() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &five_terms());
    let report = dir.path().join("report.json");
    assert!(run(&["analyze", s(&p), "--out", s(&report)]).status.success());
    let original = entry_map(&serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap());
    assert_eq!(original.len(), 5);

    let back = dir.path().join("back.json");
    assert!(run(&["synth", s(&report), "--out", s(&back)]).status.success());
    let again = stdout_json(&run(&["analyze", s(&back)]));
    assert_eq!(entry_map(&again), original);

    let top2: Value = stdout_json(&run(&["synth", s(&report), "-n", "2"]));
    let qs: Vec<String> = top2["terms"].as_array().unwrap().iter().map(|t| format!("{}/{}", t["q"]["num"], t["q"]["den"])).collect();
    assert_eq!(qs.len(), 2);
    assert!(qs.contains(&"1/2".to_string()) && qs.contains(&"1/1".to_string()), "{qs:?}");

    let zero = stdout_json(&run(&["synth", s(&report), "-n", "0"]));
    assert!(zero["terms"].as_array().unwrap().is_empty());
    assert_eq!(run(&["synth", s(&report), "-n", "-1"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_valid_specs() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &five_terms());
    let r = stdout_json(&run(&["verify", s(&p)]));
    assert_eq!(r["passed"], true);
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["status"], "pass", "{c}");
    }
}

#[test]
fn verify_constant_has_zero_exact_residuals() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &spec(vec![term(1.5, -2.0, 0, 1)]));
    let r = stdout_json(&run(&["verify", s(&p)]));
    for c in r["checks"].as_array().unwrap() {
        if c["name"] != "parseval_numeric" {
            assert_eq!(c["residual"], 0.0, "{c}");
        }
    }
}

#[test]
fn verify_rejects_non_descending_term() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "f.json",
        &json!({"terms": [{"coeff": {"re": 1.0, "im": 0.0}, "lambda": {"num": 1, "den": 2}, "rho": {"a": 1, "b": 3}}]}),
    );
    let o = run(&["verify", s(&p)]);
    assert_eq!(o.status.code(), Some(4));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let inv = &r["checks"][0];
    assert_eq!(inv["name"], "invariance");
    assert_eq!(inv["status"], "fail");
    assert!((inv["residual"].as_f64().unwrap() - 2.0).abs() < 0.1);
    assert_eq!(run(&["analyze", s(&p)]).status.code(), Some(4));
}

#[test]
fn approx_finite_spec() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &five_terms());
    let o = run(&["--format", "csv", "approx", s(&p), "--n-list", "0,1,2,3,4,5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let errs: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(errs.len(), 6);
    assert!(errs[5] < 1e-10);
    assert!(errs.windows(2).all(|w| w[1] <= w[0]));

    let r = stdout_json(&run(&["approx", s(&p), "--n-list", "0"]));
    let analyzed = stdout_json(&run(&["analyze", s(&p)]));
    let sum_abs: f64 = entry_map(&analyzed).iter().map(|(_, re, im)| re.hypot(*im)).sum();
    let e0 = r["rows"][0]["sup_error"].as_f64().unwrap();
    assert!(e0 <= sum_abs + 1e-12 && e0 > 0.0);
}

#[test]
fn approx_dyadic_series() {
    let dir = TempDir::new().unwrap();
    let n = 40;
    let terms: Vec<Value> = (1..=n).map(|k| term(0.5f64.powi(k), 0.0, 1, 1 << k)).collect();
    let majorant: Vec<f64> = (1..=n).map(|k| 0.5f64.powi(k)).collect();
    let p = write(&dir, "f.json", &json!({"terms": terms, "majorant": majorant}));
    let r = stdout_json(&run(&["approx", s(&p), "--series", "--n-list", "1,5,10"]));
    let rows = r["rows"].as_array().unwrap();
    assert!(rows[2]["sup_error"].as_f64().unwrap() <= 0.5f64.powi(9));
    assert!(rows[2]["majorant_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(r["non_increasing"], true);

    let finite = write(&dir, "g.json", &five_terms());
    assert_eq!(run(&["approx", s(&finite), "--series"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &five_terms());
    for cmd in ["analyze", "verify", "approx"] {
        let a = run(&[cmd, s(&p)]);
        let b = run(&[cmd, s(&p)]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn env_config_is_reported_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "f.json", &five_terms());
    let o = solh().env("SOLH_MEAN_T", "2000").args(["verify", s(&p)]).output().unwrap();
    assert_eq!(stdout_json(&o)["config"]["mean_t"], 2000.0);
    let o = solh().env("SOLH_MEAN_T", "2000").args(["--mean-T", "3000", "verify", s(&p)]).output().unwrap();
    assert_eq!(stdout_json(&o)["config"]["mean_t"], 3000.0);
    assert_eq!(run(&["--mean-T", "-1", "verify", s(&p)]).status.code(), Some(2));
}
