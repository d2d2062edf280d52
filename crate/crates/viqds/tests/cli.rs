use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn viqds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viqds"))
        .args(args)
        .env_remove("VIQDS_SEED")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = viqds(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn row<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|row| row["name"] == name)
        .unwrap_or_else(|| panic!("no row {name}"))
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn exact_reports_completeness_and_soundness() {
    let r = report(&["exact", "--p", "3"]);
    assert_eq!(r["pass"], true);
    assert_eq!(r["config"]["p"], 3);
    assert!((row(&r, "completeness")["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(row(&r, "soundness")["value"].as_f64().unwrap() <= 1.0 / 3.0 + 1e-10);

    let r = report(&["exact", "--p", "2", "--l", "3"]);
    assert!((row(&r, "soundness")["value"].as_f64().unwrap() - 0.125).abs() < 1e-10);
}

#[test]
fn invalid_arguments_exit_with_two() {
    let out = viqds(&["exact", "--p", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime"));
    assert_eq!(viqds(&["exact", "--l", "0"]).status.code(), Some(2));
    assert_eq!(viqds(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(viqds(&["viqds", "--scenario", "/nonexistent/scenario.json"]).status.code(), Some(2));
    assert_eq!(viqds(&["zk", "--instruments", "bogus"]).status.code(), Some(2));
    assert_eq!(viqds(&["--help"]).status.code(), Some(0));
}

#[test]
fn soundness_of_tensored_games() {
    let r = report(&["soundness", "--components", "2,3"]);
    let row = &r["rows"][0];
    assert!((row["primal"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-5);
    assert!(row["gap"].as_f64().unwrap() < 1e-6);

    let r = report(&["--p", "2", "soundness", "--tensor", "2"]);
    assert!((r["rows"][0]["primal"].as_f64().unwrap() - 0.25).abs() < 1e-5);
}

#[test]
fn soundness_of_a_game_file() {
    // Guess a uniformly random bit from a state that carries no information.
    let m = |d: [f64; 4]| json!({"rows": 2, "cols": 2, "factors": [2], "data": d.map(|x| [x, 0.0])});
    let game = json!({
        "kind": "records", "dim_a": 2, "dim_b": 2,
        "records": [
            {"weight": 0.5, "rho_a": m([0.5, 0.0, 0.0, 0.5]), "pi_b": m([1.0, 0.0, 0.0, 0.0])},
            {"weight": 0.5, "rho_a": m([0.5, 0.0, 0.0, 0.5]), "pi_b": m([0.0, 0.0, 0.0, 1.0])},
        ],
    });
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "game.json", &game);
    let r = report(&["soundness", "--game", &path]);
    assert!((r["rows"][0]["primal"].as_f64().unwrap() - 0.5).abs() < 1e-6);

    let broken = json!({"kind": "records", "dim_a": 2, "dim_b": 2,
        "records": [{"weight": 1.0, "rho_a": m([1.0, 0.0, 0.0, 0.0]), "pi_b": {"rows": 2, "cols": 2, "factors": [2], "data": []}}]});
    let path = write(dir.path(), "broken.json", &broken);
    assert_eq!(viqds(&["soundness", "--game", &path]).status.code(), Some(2));
}

#[test]
fn zk_rows_per_instrument() {
    let r = report(&["zk", "--instruments", "honest,eigenbasis:0,random:3"]);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for row in rows {
        if row["specious"] == true {
            assert!(row["max_tv"].as_f64().unwrap() < 1e-9);
        }
    }
    assert!(rows.iter().any(|row| row["specious"] == false && row["max_tv"].as_f64().unwrap() > 0.01));
}

#[test]
fn forging_scenario_with_session_log() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = json!({
        "p": 3, "L": 2, "N": 2, "messages": [0, 1, 1],
        "adversary": {"kind": "respond_constant", "parameters": {"value": 0}},
        "seed": 11, "sessions": 50,
    });
    let path = write(dir.path(), "s.json", &scenario);
    let log = dir.path().join("log.jsonl");
    let r = report(&["viqds", "--scenario", &path, "--log", log.to_str().unwrap()]);
    assert_eq!(r["pass"], true);
    let forgery = row(&r, "forgery");
    assert!((forgery["exact"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let text = fs::read_to_string(&log).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l.is_object()));
}

#[test]
fn bitwise_scenario_counts_key_systems() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = json!({
        "p": 2, "L": 2, "N": 1, "messages": [], "bits": "10110010",
        "adversary": {"kind": "none"}, "seed": 3, "sessions": 10,
    });
    let path = write(dir.path(), "bits.json", &scenario);
    let r = report(&["viqds", "--scenario", &path]);
    let res = row(&r, "resources");
    assert_eq!(res["bits"], 8);
    assert_eq!(res["key_systems"], 16);
}

#[test]
fn csv_and_table_formats() {
    let out = viqds(&["exact", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bound,name,pass,value"));
    assert_eq!(lines.count(), 3);

    let out = viqds(&["exact", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("completeness"));
    assert!(text.trim_end().ends_with("pass=true"));
}

#[test]
fn output_file_and_seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_viqds"))
        .args(["exact", "--output", path.to_str().unwrap()])
        .env("VIQDS_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["config"]["seed"], 99);

    let flag = report(&["exact", "--seed", "99"]);
    assert_eq!(flag, r);
}
