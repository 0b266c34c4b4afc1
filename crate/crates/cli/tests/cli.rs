use std::path::Path;
use std::process::Command;

use serde_json::{Map, Value};

const BIN: &str = env!("CARGO_BIN_EXE_calib");

fn calib(dir: &Path, config: &str, args: &[&str]) -> i32 {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env("CALIB_LOG", "error")
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// A config holding every default listed in the schema.
fn defaults(node: &Value) -> Option<Value> {
    if let Some(d) = node.get("default") {
        return Some(d.clone());
    }
    let props = node.get("properties")?.as_object()?;
    let mut out = Map::new();
    for (k, v) in props {
        if let Some(d) = defaults(v) {
            out.insert(k.clone(), d);
        }
    }
    Some(Value::Object(out))
}

#[test]
fn schema_defaults_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = defaults(&schema()).unwrap();
    assert!(cfg["scan"]["grid"] == 32 && cfg["tolerances"]["d"] == 1e-9);
    assert_eq!(calib(dir.path(), &cfg.to_string(), &["check"]), 0);
}

#[test]
fn schema_lists_every_section() {
    let s = schema();
    let props = s["properties"].as_object().unwrap();
    for key in ["triple", "params", "tolerances", "samples", "scan", "rho", "step3", "energy", "seed", "out"] {
        assert!(props.contains_key(key), "{key}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(calib(p, "{}", &["check"]), 0);
    assert_eq!(calib(p, r#"{"params": {"epsilonn": 0.05}}"#, &["check"]), 2);
    assert_eq!(calib(p, r#"{"triple": {"modes": [{"k": 1, "c": 0.5, "z": 1}]}}"#, &["check"]), 2);
    assert_eq!(calib(p, r#"{"params": {"epsilon": 0.6}}"#, &["verify", "--conditions", "b"]), 2);
    assert_eq!(calib(p, r#"{"triple": {"constants": [1.0, 1.0, 2.0]}}"#, &["check"]), 1);
    assert_eq!(calib(p, "{", &["check"]), 2);
    assert_eq!(calib(p, "{}", &["verify", "--conditions", "q"]), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = r#"{"triple": {"modes": [{"k": 1, "c": 0.5}]}, "energy": {"per_kind": 3, "mesh_n": 12}, "seed": 5}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(calib(a.path(), cfg, &["energy"]), 0);
    assert_eq!(calib(b.path(), cfg, &["energy"]), 0);
    for f in ["energy.csv", "report.json"] {
        let x = std::fs::read(a.path().join("out").join(f)).unwrap();
        let y = std::fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn verify_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"samples": {"b": 200, "c": 200}}"#;
    assert_eq!(calib(dir.path(), cfg, &["verify", "--conditions", "b,c"]), 0);
    let csv = std::fs::read_to_string(dir.path().join("out/witnesses.csv")).unwrap();
    assert!(csv.lines().count() >= 3, "{csv}");
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert!(report["schema_version"].is_number() || report["schema_version"].is_string());
    assert_eq!(report["conditions"]["b"]["pass"], true);
}
