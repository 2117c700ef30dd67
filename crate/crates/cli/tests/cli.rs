use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gstar")).args(args).output().expect("run gstar")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn series(v: &Value) -> Vec<(f64, f64)> {
    v["series"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c[0].as_f64().unwrap(), c[1].as_f64().unwrap()))
        .collect()
}

#[test]
fn chartable_small() {
    let out = gstar(&["chartable", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["table"], serde_json::json!([[1, 1], [1, -1]]));
    assert_eq!(v["frames"], serde_json::json!([[2], [1, 1]]));
    let out = gstar(&["chartable", "1"]);
    assert_eq!(json(&out)["table"], serde_json::json!([[1]]));
}

#[test]
fn chartable_round_trips() {
    let out = gstar(&["chartable", "5"]);
    let parsed: grassmann_star::characters::CharTable = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed, *grassmann_star::characters::character_table(5).unwrap());
}

#[test]
fn chartable_out_of_range() {
    let out = gstar(&["chartable", "13"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside supported range"));
    assert!(out.stdout.is_empty());
}

#[test]
fn coeffs_at_c_three() {
    let out = gstar(&["coeffs", "2", "--p", "2", "--mu", "1", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["c"], "3/1");
    assert_eq!(v["s"]["(2,0)"], "1/8");
    assert_eq!(v["s"]["(0,1)"], "-1/24");
    assert_eq!(v["sum_check"], "1/12");
    assert_eq!(v["t"]["[1,1]"], serde_json::json!(["0/1", "-1/1", "1/1"]));
}

#[test]
fn coeffs_first_order_is_reciprocal() {
    let v = json(&gstar(&["coeffs", "1", "--p", "3", "--mu", "2/3", "--lambda", "1/5"]));
    // c = 10/3 + 3
    assert_eq!(v["c"], "19/3");
    assert_eq!(v["s"]["(1)"], "3/19");
    assert_eq!(v["sum_check"], "3/19");
}

#[test]
fn coeffs_pole_names_frame() {
    let out = gstar(&["coeffs", "2", "--p", "2", "--mu", "1", "--lambda", "-1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_[1,1]"));
}

#[test]
fn bad_rational_is_usage_error() {
    assert_eq!(gstar(&["coeffs", "2", "--mu", "x/2"]).status.code(), Some(2));
    assert_eq!(gstar(&["verify", "--path", "rows"]).status.code(), Some(2));
    assert_eq!(gstar(&["verify", "--p", "2", "--q", "0"]).status.code(), Some(2));
    assert_eq!(gstar(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn star_with_unit() {
    let out = gstar(&["star", &data("f3.json"), &data("one.json"), "--p", "2", "--q", "1", "--order", "3", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let s = series(&json(&out));
    assert_eq!(s.len(), 4);
    assert!(s[1..].iter().all(|c| c.0.abs() < 1e-12 && c.1.abs() < 1e-12));
    assert!(s[0].0.hypot(s[0].1) > 0.0);
}

#[test]
fn star_closed_form_agrees() {
    let common = [data("f3.json"), data("g3.json")];
    let flags = ["--p", "1", "--q", "2", "--order", "4", "--seed", "11", "--mu", "5/2"];
    let mut a_args: Vec<&str> = vec!["star", &common[0], &common[1]];
    a_args.extend(flags);
    let mut b_args = a_args.clone();
    b_args.push("--closed-form");
    let a = series(&json(&gstar(&a_args)));
    let b = series(&json(&gstar(&b_args)));
    assert_eq!(a.len(), 5);
    for (x, y) in a.iter().zip(&b) {
        let scale = x.0.hypot(x.1).max(1.0);
        assert!((x.0 - y.0).hypot(x.1 - y.1) < 1e-11 * scale, "{x:?} vs {y:?}");
    }
}

#[test]
fn star_closed_form_needs_projective_space() {
    let out = gstar(&["star", &data("f3.json"), &data("g3.json"), "--p", "2", "--q", "1", "--closed-form"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn star_fixed_lambda_value() {
    let out = gstar(&["star", &data("f3.json"), &data("g3.json"), "--p", "2", "--q", "1", "--lambda", "1/3", "--path", "frames"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["value"].is_array());
    assert!(v.get("series").is_none());
    let pole = gstar(&["star", &data("f3.json"), &data("g3.json"), "--p", "2", "--q", "1", "--lambda", "-1"]);
    assert_eq!(pole.status.code(), Some(3));
}

#[test]
fn star_rejects_bad_input() {
    assert_eq!(gstar(&["star", "/nonexistent.json", &data("g3.json"), "--p", "2", "--q", "1"]).status.code(), Some(2));
    // functions on C^3 do not fit G_{2,2}
    assert_eq!(gstar(&["star", &data("f3.json"), &data("g3.json"), "--p", "2", "--q", "2"]).status.code(), Some(2));
}

#[test]
fn star_at_given_point_round_trips() {
    let first = gstar(&["star", &data("f3.json"), &data("g3.json"), "--p", "2", "--q", "1", "--seed", "9"]);
    let v = json(&first);
    let dir = tempfile::tempdir().unwrap();
    let point_file = dir.path().join("point.json");
    std::fs::write(&point_file, serde_json::to_string(&v["point"]).unwrap()).unwrap();
    let second = gstar(&["star", &data("f3.json"), &data("g3.json"), "--p", "2", "--q", "1", "--seed", "1", "--point", point_file.to_str().unwrap()]);
    let w = json(&second);
    assert_eq!(v["point"], w["point"]);
    assert_eq!(v["series"], w["series"]);
    let z: grassmann_star::geometry::PointZ = serde_json::from_value(v["point"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&z).unwrap(), v["point"]);
}

#[test]
fn star_golden() {
    let out = gstar(&["star", &data("f3.json"), &data("g3.json"), "--p", "2", "--q", "1", "--order", "2", "--seed", "3", "--mu", "3/2"]);
    let v = json(&out);
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(data("golden_star_p2_q1_n2.json")).unwrap()).unwrap();
    assert_eq!(v["config"], golden["config"]);
    assert_eq!(v["point"], golden["point"]);
    let (a, b) = (series(&v), series(&golden));
    assert_eq!(a.len(), 3);
    for (x, y) in a.iter().zip(&b) {
        assert!((x.0 - y.0).hypot(x.1 - y.1) < 1e-12, "{x:?} vs {y:?}");
    }
}

#[test]
fn verify_defaults_pass() {
    let out = gstar(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().unwrap();
    for name in ["unit", "associativity", "first_order_commutator", "conjugation", "coefficient_paths", "projective_closed_form", "large_lambda_finite", "projected_s_round_trip"] {
        assert!(checks.iter().any(|c| c["check"] == name), "missing {name}");
    }
    for c in checks {
        for key in ["check", "params", "residual", "tolerance", "pass"] {
            assert!(c.get(key).is_some());
        }
    }
}

#[test]
fn verify_pole_and_failure_codes() {
    assert_eq!(gstar(&["verify", "--lambda", "-1"]).status.code(), Some(3));
    // a negative tolerance is rejected, a zero tolerance makes floating checks fail
    assert_eq!(gstar(&["verify", "--tolerance", "-1"]).status.code(), Some(2));
    let out = gstar(&["verify", "--p", "2", "--q", "1", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn verify_is_deterministic() {
    let a = gstar(&["verify", "--seed", "42", "--p", "2", "--q", "1"]);
    let b = gstar(&["verify", "--seed", "42", "--p", "2", "--q", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = gstar(&["verify", "--seed", "43", "--p", "2", "--q", "1"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let out = gstar(&["chartable", "3", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["r"], 3);
}
