use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hilbertkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

struct Specs {
    _dir: TempDir,
    disk: String,
    square: String,
    dir: PathBuf,
}

fn specs() -> Specs {
    let dir = TempDir::new().unwrap();
    let disk = write(dir.path(), "disk.json", r#"{"type":"disk"}"#);
    let square = write(
        dir.path(),
        "square.json",
        r#"{"type":"polygon","vertices":[[0,0],[1,0],[1,1],[0,1]]}"#,
    );
    Specs {
        dir: dir.path().to_path_buf(),
        disk: disk.to_string_lossy().into(),
        square: square.to_string_lossy().into(),
        _dir: dir,
    }
}

const SYMMETRIC: &str = "1.5707963267948966,3.665191429188092,5.759586531581287";
const SQUARE_CORNER: &str = "0,0.25025,0.74975";

#[test]
fn dist_prints_six_decimals() {
    let s = specs();
    let o = run(&["dist", "--spec", &s.disk, "--p", "0,0", "--q", "0.5,0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.549306");
    let o = run(&["dist", "--spec", &s.disk, "--p", "0.2,0.1", "--q", "0.2,0.1"]);
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn dist_outside_is_a_usage_error() {
    let s = specs();
    let o = run(&["dist", "--spec", &s.disk, "--p", "2,0", "--q", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("point not interior"));
}

#[test]
fn malformed_inputs_exit_two() {
    let s = specs();
    let bad = write(&s.dir, "bad.json", r#"{"type":"pball","p":0.5}"#);
    let o = run(&["dist", "--spec", bad.to_str().unwrap(), "--p", "0,0", "--q", "0.1,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["dist", "--spec", &s.disk, "--p", "0", "--q", "0.1,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["dist", "--spec", "/nonexistent.json", "--p", "0,0", "--q", "0.1,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn area_of_a_disk_triangle() {
    let s = specs();
    let o = run(&["area", "--spec", &s.disk, "--triangle", SYMMETRIC]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - std::f64::consts::PI).abs() < 0.01 * std::f64::consts::PI);
    assert_eq!(v["diverged"], Value::Bool(false));
}

#[test]
fn halving_the_tolerance_stays_within_the_error_bound() {
    let s = specs();
    let a: Value = serde_json::from_str(&stdout(&run(&["area", "--spec", &s.disk, "--triangle", SYMMETRIC, "--tol", "1e-3"]))).unwrap();
    let b: Value = serde_json::from_str(&stdout(&run(&["area", "--spec", &s.disk, "--triangle", SYMMETRIC, "--tol", "5e-4"]))).unwrap();
    let change = (a["value"].as_f64().unwrap() - b["value"].as_f64().unwrap()).abs();
    assert!(change < a["error_bound"].as_f64().unwrap());
}

#[test]
fn square_corner_triangle_diverges() {
    let s = specs();
    let o = run(&["area", "--spec", &s.square, "--triangle", SQUARE_CORNER]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["diverged"], Value::Bool(true));
}

#[test]
fn normalize_symmetric_disk_triangle() {
    let s = specs();
    let o = run(&["normalize", "--spec", &s.disk, "--triangle", SYMMETRIC]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(v["vertex_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn normalize_rejects_a_side_in_the_boundary() {
    let s = specs();
    let o = run(&["normalize", "--spec", &s.square, "--triangle", "0.05,0.2,0.6"]);
    assert_eq!(o.status.code(), Some(2));
}

fn small_sweep_config(dir: &Path) -> String {
    write(
        dir,
        "small.toml",
        "seed = 5\n[sweep]\nthin_budget = 4\nfour_point_budget = 100\narea_budget = 3\n",
    )
    .to_string_lossy()
    .into()
}

#[test]
fn sweep_rows_and_header() {
    let s = specs();
    let cfg = small_sweep_config(&s.dir);
    let o = run(&["--config", &cfg, "sweep", "--family", "pball", "--grid", "2,4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,param,delta_thin,delta_4pt,sup_area,diverged,seed"));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let area = |r: &csv::StringRecord| r[4].parse::<f64>().unwrap();
    assert!(area(&rows[1]) > area(&rows[0]));
    assert_eq!(&rows[0][6], "5");
}

#[test]
fn sweep_is_byte_identical_for_a_seed() {
    let s = specs();
    let cfg = small_sweep_config(&s.dir);
    let (a, b) = (s.dir.join("a.csv"), s.dir.join("b.csv"));
    for out in [&a, &b] {
        let o = run(&[
            "--config", &cfg, "--out", out.to_str().unwrap(), "sweep", "--grid", "3", "--seed", "11",
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn sweep_needs_a_grid() {
    assert_eq!(run(&["sweep", "--grid"]).status.code(), Some(2));
    assert_eq!(run(&["sweep"]).status.code(), Some(2));
}

#[test]
fn verify_cone_suite() {
    let o = run(&["verify", "lemma-a4"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    let first = &v["checks"][0];
    assert!(first["value"].as_f64().unwrap() <= 69.3);
}

#[test]
fn verify_comparison_suite() {
    let o = run(&["verify", "comparison"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["checks"][0]["value"].as_f64(), Some(0.0));
}

#[test]
fn verify_unknown_suite() {
    assert_eq!(run(&["verify", "nope"]).status.code(), Some(2));
}
