use std::path::Path;
use std::process::{Command, Output};

use surface_census::cli::{EXIT_BUDGET, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surface-census"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn bound_prints_factor_table() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["census", "bound", "--genus", "2", "--max-degree", "3"]);
    assert_eq!(code(&o), EXIT_OK);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("69984") && out.contains("16777216"), "{out}");
    assert_eq!(code(&run(d.path(), &["bound", "--genus", "2", "--max-degree", "3"])), EXIT_OK);
}

#[test]
fn usage_errors_exit_64() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(d.path(), &["census", "--bogus"])), EXIT_USAGE);
    assert_eq!(code(&run(d.path(), &["frobnicate"])), EXIT_USAGE);
    assert_eq!(code(&run(d.path(), &["covers", "count", "--genus", "2"])), EXIT_USAGE);
    assert_eq!(code(&run(d.path(), &["--help"])), EXIT_OK);
}

#[test]
fn malformed_json_reports_position() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "bad.json", "{\n  \"pants\": [],\n  \"cuffs\" []\n}\n");
    write(d.path(), "coords.json", r#"{"z":[[1,0],[1,0],[1,0]],"w":[[0,0],[0,0],[0,0]]}"#);
    let o = run(d.path(), &["fenchel", "build", "--graph", "bad.json", "--coords", "coords.json", "--out", "r.json"]);
    assert_eq!(code(&o), EXIT_DOMAIN);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(!d.path().join("r.json").exists());
}

#[test]
fn domain_errors_exit_1() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "coords.json", r#"{"z":[[-1,0],[1,0],[1,0]],"w":[[0,0],[0,0],[0,0]]}"#);
    let o = run(d.path(), &["fenchel", "build", "--graph", "theta", "--coords", "coords.json", "--out", "r.json"]);
    assert_eq!(code(&o), EXIT_DOMAIN);
    assert_eq!(code(&run(d.path(), &["census", "bound", "--genus", "0", "--max-degree", "3"])), EXIT_DOMAIN);
    assert_eq!(code(&run(d.path(), &["covers", "count", "--genus", "0", "--degree", "2"])), EXIT_DOMAIN);
    let o = run(d.path(), &["fenchel", "bend", "--graph", "theta", "--coords", "coords.json", "--theta", "0-1", "--out", "b.json"]);
    assert_eq!(code(&o), EXIT_DOMAIN);
}

#[test]
fn budget_exhaustion_exits_2_with_partial_output() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["census", "enumerate", "--genus", "2", "--max-degree", "12", "--shards", "4", "--max-seconds", "0.2", "--out", "c.json"]);
    assert_eq!(code(&o), EXIT_BUDGET);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("c.json")).unwrap()).unwrap();
    assert!(v["partial"]["total_shards"].as_u64().unwrap() > 0);
    assert_eq!(code(&run(d.path(), &["covers", "count", "--genus", "2", "--degree", "20"])), EXIT_BUDGET);
    assert_eq!(code(&run(d.path(), &["census", "enumerate", "--genus", "2", "--max-degree", "18", "--out", "x.json"])), EXIT_BUDGET);
}

#[test]
fn artifacts_carry_seed_and_version() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "coords.json", r#"{"z":[[1.5,0],[1.5,0],[1.5,0]],"w":[[1,0],[1,0],[1,0]]}"#);
    let o = run(d.path(), &["--seed", "99", "fenchel", "build", "--graph", "theta", "--coords", "coords.json", "--out", "r.json"]);
    assert_eq!(code(&o), EXIT_OK);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["meta"]["seed"], 99);
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["relator_residual"].as_f64().unwrap() <= 1e-8);
    let names: Vec<_> = std::fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "temporary files left behind: {names:?}");
}

#[test]
fn amalgamated_surface_feeds_fenchel() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", r#"{"genus":2,"degree":2,"images":{"a1":[2,1],"b1":[1,2],"a2":[1,2],"b2":[1,2]}}"#);
    let o = run(d.path(), &["amalgamate", "--left", "c.json", "--right", "c.json", "--k", "2", "--eps", "0.1", "--R", "4", "--out", "s.json"]);
    assert_eq!(code(&o), EXIT_OK);
    let o = run(d.path(), &["fenchel", "build", "--surface", "s.json", "--out", "r.json"]);
    assert_eq!(code(&o), EXIT_OK);
    let o = run(d.path(), &["cloud", "--surface", "s.json", "--max-len", "3", "--out", "c.csv", "--ppm", "c.ppm", "--size", "16x8"]);
    assert_eq!(code(&o), EXIT_OK);
    let csv = std::fs::read_to_string(d.path().join("c.csv")).unwrap();
    assert!(csv.lines().nth(1) == Some("re,im,chart") && csv.lines().count() > 3);
    let ppm = std::fs::read_to_string(d.path().join("c.ppm")).unwrap();
    assert!(ppm.starts_with("P3\n16 8\n255\n"));
    assert_eq!(ppm.lines().count(), 3 + 8);
}

#[test]
fn maximal_counts_csv() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["covers", "maximal", "--genus", "2", "--degree", "3", "--out", "m.csv"]);
    assert_eq!(code(&o), EXIT_OK);
    let csv = std::fs::read_to_string(d.path().join("m.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows, ["k,m_n(k)", "1,55", "2,32", "3,45"]);
}
