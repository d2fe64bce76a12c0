use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn nodal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal")).args(args).output().expect("binary runs")
}

fn nodal_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(args)
        .env("NODAL_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn validate(doc: &Value) {
    let kind = doc["kind"].as_str().expect("report has a kind");
    let text = std::fs::read_to_string(schema_dir().join(format!("{kind}.schema.json"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{kind} report fails its schema: {msgs:?}");
}

fn json_ok(args: &[&str]) -> Value {
    let out = nodal(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    validate(&doc);
    doc
}

fn polylines(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.lines()
        .filter_map(|l| l.split("points=\"").nth(1))
        .map(|p| {
            p.trim_end_matches("\"/>")
                .split(' ')
                .map(|xy| {
                    let (x, y) = xy.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect()
        })
        .collect()
}

fn closed(line: &[(f64, f64)]) -> bool {
    line.len() > 3 && line.first() == line.last()
}

#[test]
fn lattice_report() {
    let doc = json_ok(&["lattice", "--n", "65"]);
    assert_eq!(doc["result"]["r2"], 16);
    let doc = json_ok(&["lattice", "--n", "3", "--candidates", "30"]);
    assert_eq!(doc["result"]["r2"], 0);
    assert_eq!(doc["result"]["candidates"], serde_json::json!([5, 10, 17, 26]));
}

#[test]
fn diagonal_flip_density_of_cilleruelo() {
    let doc = json_ok(&["flips", "--preset", "cilleruelo", "--diagonal"]);
    assert!(doc["result"]["density"].as_f64().unwrap().abs() <= 1e-12);
    let doc = json_ok(&["flips", "--preset", "uniform:16", "--axis", "2", "--M", "3", "--R", "2"]);
    assert!(doc["result"]["empirical"]["mean_per_area"].as_f64().unwrap() > 0.0);
}

#[test]
fn portraits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = nodal(&["portrait", "--preset", "cilleruelo", "--R", "12", "--seed", "7", "--out-dir", d, "--name", "cil"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("cil.svg")).unwrap();
    let lines = polylines(&svg);
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| !closed(l)));
    let census: Value = serde_json::from_slice(&std::fs::read(dir.path().join("cil.json")).unwrap()).unwrap();
    validate(&census);
    assert_eq!(census["result"]["interior_components"], 0);
    assert!(dir.path().join("cil.csv").exists());

    let out = nodal(&["portrait", "--section7", "f", "--R", "15", "--out-dir", d, "--name", "f"]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("f.svg")).unwrap();
    assert!(polylines(&svg).iter().any(|l| closed(l)));

    let out = nodal(&["portrait", "--torus-n", "2917", "--seed", "1", "--out-dir", d, "--name", "t", "--ppm", "--size", "64"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ppm = std::fs::read(dir.path().join("t.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n64 64\n255\n"));
    assert_eq!(ppm.len(), 13 + 64 * 64 * 3);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &str| -> Vec<String> {
        ["portrait", "--preset", "arc:0.4:32", "--R", "3", "--seed", "5", "--name", name, "--out-dir"]
            .iter()
            .map(|s| s.to_string())
            .chain([dir.path().to_str().unwrap().to_string()])
            .collect()
    };
    for (name, threads) in [("a", "1"), ("b", "2")] {
        let a: Vec<String> = args(name);
        let refs: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
        assert!(nodal_with_threads(&refs, threads).status.success());
    }
    for ext in ["svg", "csv", "json"] {
        let a = std::fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(a, b, "{ext}");
    }
    let cns = ["cns", "--preset", "uniform:16", "--schedule", "2,3,4", "--M", "10"];
    let one = nodal_with_threads(&cns, "1");
    let two = nodal_with_threads(&cns, "3");
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn estimator_reports_validate() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cns.csv");
    let doc = json_ok(&["cns", "--preset", "uniform:32", "--schedule", "2,3,4", "--M", "10", "--csv", csv.to_str().unwrap()]);
    assert!(doc["result"]["cns_estimate"].as_f64().unwrap() > 0.0);
    let table = std::fs::read_to_string(csv).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 4);
    let doc = json_ok(&["cns", "--preset", "cilleruelo", "--schedule", "2,3,4", "--M", "10"]);
    assert_eq!(doc["result"]["cns_estimate"].as_f64().unwrap(), 0.0);
    json_ok(&["dns", "--preset", "uniform:16", "--schedule", "2,3,4", "--M", "10"]);
    json_ok(&["dns", "--preset", "uniform:16", "--R", "3", "--cns", "0.1", "--M", "10"]);
    let doc = json_ok(&["torus", "--n", "25", "--M", "10", "--compare", "2,3,4"]);
    assert!(doc["result"]["residual"].is_number());
    json_ok(&["census", "--preset", "uniform:32", "--R", "3", "--flips"]);
    json_ok(&["census", "--torus-n", "65"]);
}

#[test]
fn stability_reports_validate() {
    let doc = json_ok(&["stability", "--section7", "monochromatic_g", "--R", "5", "--h", "0.05"]);
    assert!(doc["result"]["min_max"].as_f64().unwrap() >= 0.5);
    let doc = json_ok(&["stability", "--preset", "uniform:16", "--against", "uniform:32", "--R", "3", "--M", "5"]);
    assert_eq!(doc["result"]["draws"], 5);
}

#[test]
fn measure_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(
        &path,
        r#"{"kind": "atomic", "kappa": "one", "atoms": [{"x": 1, "y": 0, "w": 0.25}, {"x": -1, "y": 0, "w": 0.25}, {"x": 0, "y": 1, "w": 0.25}, {"x": 0, "y": -1, "w": 0.25}]}"#,
    )
    .unwrap();
    let doc = json_ok(&["flips", "--measure", path.to_str().unwrap(), "--diagonal"]);
    assert_eq!(doc["provenance"]["measure"]["atoms"], 4);
}

#[test]
fn exit_codes() {
    assert_eq!(nodal(&["lattice", "--n", "65"]).status.code(), Some(0));
    assert_eq!(nodal(&["cns", "--preset", "no_such_measure"]).status.code(), Some(2));
    assert_eq!(nodal(&["cns", "--preset", "uniform:16", "--schedule", "2,3", "--M", "10"]).status.code(), Some(2));
    assert_eq!(nodal(&["lattice"]).status.code(), Some(2));
    assert_eq!(nodal(&["flips", "--measure", "/nonexistent/m.json"]).status.code(), Some(3));
    let out = nodal(&["lattice", "--n", "5", "--out", "/proc/no/such/dir/x.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/proc/no/such/dir"));
    assert_eq!(nodal_with_threads(&["lattice", "--n", "5"], "zero").status.code(), Some(2));
}
