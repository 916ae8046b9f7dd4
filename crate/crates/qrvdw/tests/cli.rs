use std::process::{Command, Output};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

const SYSTEM: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../systems/fig3_rb_k.json");

fn qrvdw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrvdw")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn causal_and_closed_form_agree_through_the_cli() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let r = format!("{:.4}", rng.gen_range(1.0..80.0));
        // T past the front: 2R/c in ps is R[µm]/150 roughly
        let t = format!("{:.4}", rng.gen_range(1.0..20.0));
        let joules = rng.gen_bool(0.5);
        let mut base = vec!["eval", "--system", SYSTEM, "--R-um", &r, "--T-ps", &t];
        if joules {
            base.push("--joules");
        }
        let a = json(&qrvdw(&[&base[..], &["--method", "closed-form"]].concat()));
        let b = json(&qrvdw(&[&base[..], &["--method", "causal"]].concat()));
        let (ea, eb) = (a["energy"].as_f64().unwrap(), b["energy"].as_f64().unwrap());
        assert!((ea - eb).abs() <= 1e-9 * ea.abs().max(eb.abs()), "R={r} T={t}: {ea} vs {eb}");
        assert_eq!(a["system_hash"], b["system_hash"]);
        assert_eq!(a["energy_unit"], if joules { "J" } else { "rad/s" });
    }
}

#[test]
fn before_the_front_is_zero() {
    let v = json(&qrvdw(&["eval", "--system", SYSTEM, "--R-um", "300", "--T-ps", "1", "--method", "causal"]));
    assert_eq!(v["energy"].as_f64(), Some(0.0));
}

#[test]
fn scan_writes_csv_with_units() {
    let out = qrvdw(&["scan", "--system", SYSTEM, "--R-um", "30:31:5", "--T-ps", "3", "--per-line"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("R [um],closed-form [rad/s]"), "{header}");
    assert!(header.contains("[line1]"), "{header}");
    assert_eq!(lines.count(), 5);
}

#[test]
fn scan_json_records_failures_per_cell() {
    // the far-field evaluator refuses the short end of the range
    let out = qrvdw(&["scan", "--system", SYSTEM, "--R-um", "0.5:30:4", "--method", "far-field", "--format", "json"]);
    let v = json(&out);
    let values = v["columns"][0]["values"].as_array().unwrap();
    assert!(values[0].is_null());
    assert!(values[3].is_f64());
    assert!(!v["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn scan_output_is_reproducible() {
    let args = ["scan", "--system", SYSTEM, "--R-um", "20:25:200", "--method", "causal", "--method", "adiabatic"];
    assert_eq!(qrvdw(&args).stdout, qrvdw(&args).stdout);
}

#[test]
fn beat_reports_periods() {
    let v = json(&qrvdw(&["beat", "--system", SYSTEM]));
    let long = v["long_period_um"].as_f64().unwrap();
    let short = v["short_period_um"].as_f64().unwrap();
    assert!((long / v["expected_long_period_um"].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert!((short / v["expected_short_period_um"].as_f64().unwrap() - 1.0).abs() < 0.02);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| qrvdw(args).status.code();
    assert_eq!(code(&["validate", "--system", SYSTEM]), Some(0));
    // usage problems
    assert_eq!(code(&["eval", "--system", SYSTEM, "--R-um", "30:20:5"]), Some(2));
    assert_eq!(code(&["eval", "--system", SYSTEM, "--method", "bogus"]), Some(2));
    assert_eq!(code(&["eval", "--system", SYSTEM, "--terms", "aa,zz"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    // domain and input problems
    assert_eq!(code(&["eval", "--system", "/nonexistent.json"]), Some(1));
    assert_eq!(code(&["eval", "--system", SYSTEM, "--R-um", "0.01", "--method", "far-field"]), Some(1));
    assert_eq!(code(&["probability", "--system", SYSTEM]), Some(1));
    assert_eq!(code(&["probability", "--system", SYSTEM, "--line", "1"]), Some(0));
}

#[test]
fn out_file_is_written() {
    let path = std::env::temp_dir().join(format!("qrvdw_cli_{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let out = qrvdw(&["compare", "--system", SYSTEM, "--R-um", "30:31:3", "--format", "json", "--out", p]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}
