//! End-to-end acceptance criteria, run through the `calib` binary.
//! Each test prints one `criterion N: PASS|FAIL` line.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_calib");

fn triple(kind: &str) -> &'static str {
    match kind {
        "constants" => r#"{"symmetry": "symmetric", "modes": [], "constants": [0.0, 1.0, 2.0]}"#,
        "symmetric" => r#"{"symmetry": "symmetric", "modes": [{"k": 1, "c": 0.5}], "constants": [0.0, 1.0, 2.0]}"#,
        "antisymmetric" => {
            r#"{"symmetry": "antisymmetric", "modes": [{"k": 1, "c": 0.5}], "constants": [0.0, 1.0, 2.0]}"#
        }
        _ => unreachable!(),
    }
}

struct Run {
    code: i32,
    report: Value,
    elapsed: Duration,
}

fn run(dir: &Path, name: &str, config: &str, args: &[&str]) -> Run {
    let cfg = dir.join(format!("{name}.json"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(name);
    let start = Instant::now();
    let status = Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .expect("calib runs");
    let elapsed = start.elapsed();
    let report = std::fs::read_to_string(out.join("report.json"))
        .map(|t| serde_json::from_str(&t).unwrap())
        .unwrap_or(Value::Null);
    Run { code: status.code().unwrap_or(-1), report, elapsed }
}

fn report(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

#[test]
fn criterion_1_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for kind in ["constants", "symmetric"] {
        let r = run(dir.path(), kind, &format!(r#"{{"triple": {}}}"#, triple(kind)), &["check"]);
        let h = &r.report["hypotheses"];
        let worst = f(&h["neumann_residual"]).max(f(&h["gradient_modulus_residual"])).max(f(&h["origin_gradient"]));
        ok &= r.code == 0 && worst <= 1e-10 && h["ordering_ok"] == true && r.elapsed <= Duration::from_secs(1);
        detail += &format!("[{kind}: residual {worst:.2e}, {:.2?}] ", r.elapsed);
    }
    report(1, ok, detail);
}

#[test]
fn criterion_2_condition_e() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for kind in ["constants", "symmetric", "antisymmetric"] {
        let cfg = format!(r#"{{"triple": {}, "samples": {{"e_per_ray": 32}}}}"#, triple(kind));
        let r = run(dir.path(), kind, &cfg, &["verify", "--conditions", "e"]);
        let e = &r.report["conditions"]["e"];
        let m = f(&e["margin"]);
        ok &= r.code == 0 && m <= 1e-6 && f(&e["samples"]) >= 96.0 && r.elapsed <= Duration::from_secs(30);
        detail += &format!("[{kind}: max |I - nu| {m:.2e}, {:.2?}] ", r.elapsed);
    }
    report(2, ok, detail);
}

#[test]
fn criterion_3_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for kind in ["symmetric", "antisymmetric"] {
        let cfg = format!(
            r#"{{"triple": {}, "samples": {{"divergence_random": 100, "divergence_per_surface": 50}}}}"#,
            triple(kind)
        );
        let r = run(dir.path(), kind, &cfg, &["verify", "--conditions", "a"]);
        let a = &r.report["conditions"]["a"];
        let m = f(&a["margin"]);
        let boxes = f(&a["samples"]);
        ok &= r.code == 0 && m <= 1e-6 && boxes >= 500.0 && r.elapsed <= Duration::from_secs(60);
        detail += &format!("[{kind}: {boxes} boxes, max |flux|/area {m:.2e}, {:.2?}] ", r.elapsed);
    }
    report(3, ok, detail);
}

#[test]
fn criterion_4_conditions_b_c() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for kind in ["constants", "symmetric", "antisymmetric"] {
        let cfg = format!(r#"{{"triple": {}, "samples": {{"b": 10000, "c": 10000}}}}"#, triple(kind));
        let r = run(dir.path(), kind, &cfg, &["verify", "--conditions", "b,c"]);
        let b = &r.report["conditions"]["b"];
        let c = &r.report["conditions"]["c"];
        let (mb, mc) = (f(&b["margin"]), f(&c["margin"]));
        ok &= r.code == 0
            && mb >= -1e-12
            && mc <= 1e-12
            && f(&b["samples"]) >= 1e4
            && f(&c["samples"]) >= 1e4
            && r.elapsed <= Duration::from_secs(10);
        detail += &format!("[{kind}: b margin {mb:.2e}, c residual {mc:.2e}, {:.2?}] ", r.elapsed);
    }
    report(4, ok, detail);
}

#[test]
fn criterion_5_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for kind in ["constants", "symmetric"] {
        let cfg = format!(r#"{{"triple": {}, "params": {{"epsilon": 0.05}}}}"#, triple(kind));
        let r = run(dir.path(), kind, &cfg, &["verify", "--conditions", "rho"]);
        let oracles = r.report["oracles"].as_array().cloned().unwrap_or_default();
        let find = |pat: &str| oracles.iter().filter(|o| o["name"].as_str().unwrap().contains(pat)).count();
        let failed: Vec<String> =
            oracles.iter().filter(|o| o["pass"] != true).map(|o| o["name"].as_str().unwrap().to_string()).collect();
        let covered = find("d2_nu rho") == 2
            && find("d2_t1 rho") == 2
            && find("d_y I^x") == 1
            && find("P1: grad rho") >= 1
            && find("P2: grad rho") >= 1
            && find("N1N2: grad rho") >= 1
            && find("|grad rho(q") >= 9
            && find("det") >= 8;
        ok &= r.code == 0 && failed.is_empty() && covered && r.elapsed <= Duration::from_secs(60);
        detail += &format!("[{kind}: {} oracles, failed {failed:?}, {:.2?}] ", oracles.len(), r.elapsed);
    }
    report(5, ok, detail);
}

#[test]
fn criterion_6_condition_d() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = String::new();
    let start = Instant::now();
    for kind in ["constants", "symmetric", "antisymmetric"] {
        let cfg = format!(r#"{{"triple": {}, "scan": {{"brute_force": 64}}}}"#, triple(kind));
        let r = run(dir.path(), kind, &cfg, &["verify", "--conditions", "d", "--grid", "32", "--refine", "3"]);
        let d = &r.report["conditions"]["d"]["details"];
        let (max, bf) = (f(&d["max_rho"]), f(&d["brute_force_max"]));
        let on_jump = f(&d["on_jump"]) == 1.0;
        ok &= r.code == 0 && max <= 1.0 + 1e-9 && on_jump && (max - bf).abs() <= 1e-6 && f(&d["off_jump_max"]) < 1.0;
        detail += &format!("[{kind}: max rho {max:.15}, brute force {bf:.15}, on jump {on_jump}, {:.2?}] ", r.elapsed);
    }
    ok &= start.elapsed() <= Duration::from_secs(300);
    report(6, ok, detail);
}

#[test]
fn criterion_7_step3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"step3": {"epsilons": [0.02, 0.05, 0.1], "delta_fractions": [0.25, 0.5, 0.75], "expected_failures": [1.8]}}"#;
    let r = run(dir.path(), "step3", cfg, &["step3"]);
    let runs = r.report["runs"].as_array().cloned().unwrap_or_default();
    let regular: Vec<&Value> = runs.iter().filter(|x| x["expected_failure"] == false).collect();
    let all_positive = regular.len() == 9
        && regular.iter().all(|x| x["report"]["pass"] == true && f(&x["report"]["min_slack"]) > 0.0);
    let large = runs.iter().find(|x| x["expected_failure"] == true);
    let large_fails = large.is_some_and(|x| {
        x["report"]["checks"]
            .as_array()
            .unwrap()
            .iter()
            .any(|c| c["set"].as_str().unwrap().contains("R2 + F") && c["pass"] == false)
    });
    let min_slack = regular.iter().map(|x| f(&x["report"]["min_slack"])).fold(f64::INFINITY, f64::min);
    let ok = r.code == 0 && all_positive && large_fails && r.elapsed <= Duration::from_secs(5);
    report(
        7,
        ok,
        format!("[9 pairs, min slack {min_slack:.3e}; eps = 1.8 vertex check fails: {large_fails}; {:.2?}]", r.elapsed),
    );
}

#[test]
fn criterion_8_energy() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = String::new();
    let start = Instant::now();
    for kind in ["constants", "symmetric"] {
        let cfg = format!(r#"{{"triple": {}, "energy": {{"per_kind": 100}}, "seed": 11}}"#, triple(kind));
        let r = run(dir.path(), kind, &cfg, &["energy"]);
        let rep = &r.report;
        let exponent = f(&rep["bubble"]["exponent"]);
        let min_gap = f(&rep["min_gap"]);
        let slack = f(&rep["slack"]);
        ok &= r.code == 0
            && rep["competitors"] == 300
            && min_gap >= -slack
            && rep["verdict"] != "fail"
            && f(&rep["max_trace_residual"]) <= 1e-12
            && (1.8..=2.2).contains(&exponent);
        detail += &format!(
            "[{kind}: min gap {min_gap:.3e} (slack {slack:.1e}), bubble exponent {exponent:.4}, {:.2?}] ",
            r.elapsed
        );
    }
    ok &= start.elapsed() <= Duration::from_secs(120);
    report(8, ok, detail);
}
