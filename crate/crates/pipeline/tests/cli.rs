mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sfcgen_core::reduced::{parse_reduced, serialize_reduced};
use tempfile::TempDir;

use common::{fixtures, verdicts};

fn sfcgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfcgen"))
        .args(args)
        .env_remove("SFCGEN_ENDPOINT")
        .env_remove("SFCGEN_MODEL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_chart(dir: &Path, name: &str, sfc: &sfcgen_core::ReducedSfc) -> PathBuf {
    let p = dir.join(format!("{name}.red"));
    std::fs::write(&p, serialize_reduced(sfc).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn convert_round_trips_through_plcopen() {
    let dir = TempDir::new().unwrap();
    let red = write_chart(dir.path(), "tank", &fixtures::tank());
    let o = sfcgen(&["convert", "--to-plcopen", s(&red)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let xml = dir.path().join("tank.xml");
    assert!(std::fs::read_to_string(&xml).unwrap().contains("<SFC>"));

    let back = dir.path().join("back.red");
    let o = sfcgen(&["convert", s(&xml), "-o", s(&back)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&back).unwrap();
    assert_eq!(parse_reduced(&text).unwrap(), fixtures::tank());
}

#[test]
fn verify_reports_an_illegal_jump() {
    let dir = TempDir::new().unwrap();
    let red = write_chart(dir.path(), "jump", &fixtures::jump_out_of_branch());
    let o = sfcgen(&["verify", s(&red)]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("Unsafe"), "{out}");
    assert!(out.contains("IllegalJump"), "{out}");

    let o = sfcgen(&["verify", "--json", s(&red)]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "Unsafe");
}

#[test]
fn verify_accepts_a_safe_chart_and_writes_smv() {
    let dir = TempDir::new().unwrap();
    let red = write_chart(dir.path(), "linear", &fixtures::linear());
    let smv = dir.path().join("linear.smv");
    let o = sfcgen(&["verify", s(&red), "--smv", s(&smv)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Safe"));
    assert!(std::fs::read_to_string(smv).unwrap().starts_with("-- guard-free token model of"));
}

#[test]
fn validate_flags_bad_charts() {
    let dir = TempDir::new().unwrap();
    let good = write_chart(dir.path(), "good", &fixtures::linear());
    let bad = dir.path().join("bad.red");
    std::fs::write(&bad, "{ not a chart").unwrap();
    assert_eq!(sfcgen(&["validate", s(&good)]).status.code(), Some(0));
    let o = sfcgen(&["validate", s(&good), s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.red:1:"));
}

#[test]
fn score_matches_hand_computation() {
    let path = verdicts::path();
    let o = sfcgen(&["score", "-k", "5", s(&path)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "gen@5 [per-sample] = 11/20 = 0.5500\n\
         pass@5 [per-sample] = 10/20 = 0.5000\n\
         safe@5 [per-sample] = 7/20 = 0.3500\n\
         prompts: 4\n"
    );
    let o = sfcgen(&["score", "-k", "3", "--any", "--json", s(&path)]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["passed"]["hits"], 2);
    assert_eq!(v["safe"]["total"], 4);

    let o = sfcgen(&["score", "-k", "6", s(&path)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(sfcgen(&[]).status.code(), Some(2));
    assert_eq!(sfcgen(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sfcgen(&["score", "x.jsonl"]).status.code(), Some(2), "missing -k");
    assert_eq!(sfcgen(&["convert", "--to-plcopen", "--to-reduced", "a.red"]).status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let prompts = dir.path().join("p.jsonl");
    std::fs::write(&prompts, "{\"id\":\"a\",\"prompt\":\"tank\"}\n").unwrap();
    let out = dir.path().join("r.jsonl");
    let o = sfcgen(&["generate", "--prompts", s(&prompts), "-o", s(&out), "--few-shot", "0"]);
    assert_eq!(o.status.code(), Some(2), "no endpoint");
    assert!(String::from_utf8_lossy(&o.stderr).contains("no endpoint configured"));
}

#[test]
fn grammar_and_schema_print() {
    let o = sfcgen(&["grammar"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).is_empty());
    let o = sfcgen(&["grammar", "--schema"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["type"], "object");
}

#[test]
fn index_retrieve_and_generate_end_to_end() {
    let dir = TempDir::new().unwrap();
    let tank = write_chart(dir.path(), "tank", &fixtures::tank());
    std::fs::write(dir.path().join("tank.txt"), "fill a tank and drain it").unwrap();
    let linear = write_chart(dir.path(), "linear", &fixtures::linear());
    let idx = dir.path().join("index.json");
    let o = sfcgen(&["index", s(&tank), s(&linear), "-o", s(&idx)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = sfcgen(&["retrieve", s(&idx), "drain the tank", "-k", "1"]);
    assert!(stdout(&o).contains("  tank  fill a tank and drain it"), "{}", stdout(&o));

    let doc = serialize_reduced(&fixtures::tank()).unwrap();
    let mock = common::mock::serve(move |_| common::mock::chat(&doc));
    let prompts = dir.path().join("p.jsonl");
    std::fs::write(&prompts, "{\"id\":\"a\",\"prompt\":\"a tank\"}\n{\"id\":\"b\",\"prompt\":\"drain\"}\n").unwrap();
    let out = dir.path().join("r.jsonl");
    let o = sfcgen(&[
        "generate", "--prompts", s(&prompts), "-o", s(&out), "--index", s(&idx), "--endpoint", &mock.url, "--model", "m", "-k", "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("safe@2 [per-sample] = 4/4"), "{}", stdout(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 4);
    assert_eq!(mock.request_count(), 4);
    // two indexed charts, so each request carries two example pairs
    let req = &mock.requests.lock().unwrap()[0];
    assert_eq!(req["messages"].as_array().unwrap().len(), 1 + 2 * 2 + 1);
}
