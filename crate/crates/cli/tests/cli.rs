use std::process::{Command, Output};

use serde_json::{json, Value};

fn starflux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starflux")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

// [PAPER]
#[test]
fn flux_rotation_golden_value() {
    let o = starflux(&["flux-rotation", "--v", "1,0", "--omega", "2,5", "--K", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["match"], true);
    assert_eq!(v["deformed"][1]["re"], json!([[1, 1], [-2, 1], [-5, 1], [0, 1]]));
    assert_eq!(v["v"], json!([1, 0]));
}

// [TRIVIAL]
#[test]
fn empty_star_table() {
    let o = starflux(&["star-table", "--json", "--K", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["table"], json!([]));
}

// [TRIVIAL]
#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(starflux(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(starflux(&["flux-rotation", "--v", "1", "--K", "2"]).status.code(), Some(1));
    assert_eq!(starflux(&["fedosov-vs-moyal", "--K", "0"]).status.code(), Some(1));
    assert_eq!(starflux(&["flux-rotation", "--v", "1,0", "--K", "1", "--omega", "1,2"]).status.code(), Some(1));
    assert_eq!(starflux(&["--help"]).status.code(), Some(0));
}

// [DERIVED]
#[test]
fn output_is_byte_stable() {
    let args = ["associativity-check", "--K", "2", "--count", "2", "--seed", "7", "--json"];
    let a = starflux(&args);
    let b = starflux(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

// [DERIVED]
#[test]
fn oracle_gate_and_tables() {
    let o = starflux(&["fedosov-vs-moyal", "--K", "3", "--modes", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["nonzero"], json!([]));
    let t = starflux(&["star-table", "--K", "1", "--pairs", "1,0:0,1", "--product", "moyal", "--json"]);
    let v = stdout_json(&t);
    assert_eq!(v["table"][0]["cochains"][1]["modes"][0]["re"], json!([[1, 2], [0, 1]]));
}

// [DERIVED]
#[test]
fn equivalence_and_sweep_files() {
    let dir = std::env::temp_dir().join(format!("starflux-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let t = dir.join("t.json");
    let coeff = |n: i64, d: i64| json!({"dim": 2, "truncation": 3, "modes": [{"m": [0, 0], "re": [0, [n, d]]}]});
    let op = json!({"dim": 2, "truncation": 3, "terms": [
        {"alpha": [2, 0], "coeff": coeff(1, 2)},
        {"alpha": [0, 2], "coeff": coeff(-2, 1)},
    ]});
    std::fs::write(&t, op.to_string()).unwrap();
    let o = starflux(&["equiv-check", "--T", t.to_str().unwrap(), "--loop", "0,1", "--omega", "1,-1", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["equal"], true);
    assert_eq!(v["before"], v["after"]);
    let s = dir.join("sweep.json");
    std::fs::write(&s, "[[1], [2, 5]]").unwrap();
    let o = starflux(&["gamma-table", "--omega-sweep", s.to_str().unwrap(), "--K", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.contains("2;5,1,0,1 + -2ν + -5ν^2"));
    let h = json!({"dim": 2, "truncation": 2, "modes": [{"m": [0, 1], "re": [0, 1]}, {"m": [0, -1], "re": [0, 1]}]});
    let o = starflux(&["heisenberg-demo", "--H", &h.to_string(), "--K", "2", "--probe-bound", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["probes"].as_array().unwrap().len(), 9);
    std::fs::remove_dir_all(&dir).ok();
}

// [DERIVED]
#[test]
fn acceptance_subset() {
    let o = starflux(&["acceptance", "--K", "2", "--only", "8,10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
}
