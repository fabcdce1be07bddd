use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SCALAR: &str = r#"{"time_domain": "continuous", "n": 1, "m": 1,
    "A": [[-1]], "B": [[1]], "C": [[1]], "D": [[2]]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_passive-center"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(text: &[u8]) -> Value {
    serde_json::from_slice(text).expect("valid JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn stderr_json(out: &Output) -> Value {
    json(out.stderr.trim_ascii())
}

#[test]
fn scalar_center() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", SCALAR);
    let out = run(&["center", s(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["converged"], Value::Bool(true));
    assert!((f(&v["x_center"][0][0]) - 5.0).abs() < 1e-8);
    assert!(f(&v["stationarity"]["f"]) < 1e-8);
}

#[test]
fn not_passive_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", &SCALAR.replace("[[2]]", "[[-1]]"));
    let out = run(&["center", s(&input)]);
    assert_eq!(out.status.code(), Some(3));
    let e = stderr_json(&out);
    assert_eq!(e["exit_code"], 3);
    assert!(e["message"].is_string());
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", &SCALAR.replace("[[2]]", "[[2, 3]]"));
    let out = run(&["center", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("D[0]"));

    let two = r#"{"time_domain": "continuous", "n": 2, "m": 1,
        "A": [[-1, 0], [0, -2]], "B": [[1], [1]], "C": [[1, 1]], "D": [[2]],
        "weight": {"Q": [[0, 1], [2, 0]], "C": [[1, 1]], "R": [[4]]}}"#;
    let input = write(&dir, "q.json", two);
    let out = run(&["center", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("weight.Q"));

    let out = run(&["center", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_model_trace_is_monotone() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("g.json");
    let trace = dir.path().join("t.csv");
    let out = run(&["gen", "--n", "12", "--m", "4", "--seed", "7", "--out", s(&model)]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["center", s(&model), "--trace", s(&trace)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["converged"], Value::Bool(true));

    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,barrier,decrement,residual,alpha,wallclock_seconds"));
    let barrier: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(barrier.len() > 1);
    assert!(barrier.windows(2).all(|w| w[1] <= w[0]));
    assert!(barrier[barrier.len() - 1] < barrier[0]);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut docs = Vec::new();
    for k in 0..2 {
        let model = dir.path().join(format!("g{k}.json"));
        let res = dir.path().join(format!("c{k}.json"));
        let args = ["gen", "--n", "6", "--m", "2", "--seed", "3", "--domain", "discrete", "--out", s(&model)];
        assert_eq!(run(&args).status.code(), Some(0));
        assert_eq!(run(&["center", s(&model), "--out", s(&res)]).status.code(), Some(0));
        docs.push((fs::read(&model).unwrap(), fs::read(&res).unwrap()));
    }
    assert_eq!(docs[0], docs[1]);
}

#[test]
fn riccati_radius_transform_check() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", SCALAR);

    let out = run(&["riccati", s(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert!(f(&v["x_min"][0][0]) < 5.0 && 5.0 < f(&v["x_max"][0][0]));

    let out = run(&["radius", s(&input), "--samples", "20", "--margin", "0.9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert!(f(&v["value"]) > 0.0);
    assert_eq!(v["probes"][0]["passed"], 20);

    let moved = dir.path().join("d.json");
    let out = run(&["transform", s(&input), "--out", s(&moved)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&fs::read(&moved).unwrap());
    assert_eq!(v["time_domain"], "discrete");
    assert!((f(&v["det_ratio"]) - 0.5).abs() < 1e-14);
    let back = run(&["transform", s(&moved)]);
    assert_eq!(back.status.code(), Some(0));
    let v = json(&back.stdout);
    assert!((f(&v["A"][0][0]) + 1.0).abs() < 1e-14);

    let with_x = write(&dir, "x.json", &SCALAR.replace("}", r#", "X": [[5]]}"#));
    let out = run(&["check", s(&with_x)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["strictly_feasible"], Value::Bool(true));
    assert!(f(&v["stationarity_residual"]) < 1e-12);

    let out = run(&["check", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
}
