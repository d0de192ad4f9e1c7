use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const EDGE: &str = r#"{"vertices":[0,1],"edges":[{"u":0,"v":1,"J":"1"}]}"#;
const TRIANGLE: &str =
    r#"{"vertices":[0,1,2],"edges":[{"u":0,"v":1,"J":"1/2"},{"u":1,"v":2,"J":"1/2"},{"u":0,"v":2,"J":"1/2"}]}"#;
const DIPOLE: &str = r#"{"0":1,"1":-1}"#;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xy-current")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn verify_bijection_on_triangle() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "triangle.json", TRIANGLE);
    let out = run(&["verify-bijection", "--graph", s(&g), "--sum-cap", "4", "--no-meta"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["passed"], true);
    // amplitudes on three edges with total at most 4: C(7, 3)
    assert_eq!(doc["result"]["amplitudes"], 35);
}

#[test]
fn check_goal_on_edge() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "edge.json", EDGE);
    let out = run(&["check-goal", "--graph", s(&g), "--phi", DIPOLE, "--psi", DIPOLE, "--sum-cap", "3", "--no-meta"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let rows = doc["result"]["per_N"].as_array().unwrap();
    let two = rows.iter().find(|r| r["N"] == serde_json::json!([2])).unwrap();
    assert_eq!(two["gap"], "1");
    assert_eq!(two["square"], "1");
}

#[test]
fn malformed_graph_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "bad.json", "{\"vertices\": [0, 1], \"edges\": [");
    let out = run(&["correlate", "--graph", s(&g), "--phi", DIPOLE, "--degree-cap", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_graphs_are_input_errors() {
    let dir = TempDir::new().unwrap();
    for (name, body) in [
        ("loop.json", r#"{"vertices":[0,1],"edges":[{"u":0,"v":0,"J":"1"}]}"#),
        ("zero.json", r#"{"vertices":[0,1],"edges":[{"u":0,"v":1,"J":"0"}]}"#),
        ("dangling.json", r#"{"vertices":[0,1],"edges":[{"u":0,"v":5,"J":"1"}]}"#),
    ] {
        let g = write(&dir, name, body);
        let out = run(&["correlate", "--graph", s(&g), "--phi", DIPOLE, "--degree-cap", "3"]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["correlate", "--graph", s(&missing), "--phi", DIPOLE, "--degree-cap", "3"]).status.code(), Some(2));
}

#[test]
fn bad_sources_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "edge.json", EDGE);
    let unknown = run(&["correlate", "--graph", s(&g), "--phi", r#"{"7":1}"#, "--degree-cap", "3"]);
    assert_eq!(unknown.status.code(), Some(2));
    let unbalanced = run(&["check-goal", "--graph", s(&g), "--phi", r#"{"0":1}"#, "--psi", DIPOLE, "--sum-cap", "2"]);
    assert_eq!(unbalanced.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_rejected() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobnicate"));
}

#[test]
fn no_meta_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "triangle.json", TRIANGLE);
    let args = ["correlate", "--graph", s(&g), "--phi", DIPOLE, "--degree-cap", "6", "--no-meta"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout_json(&a).get("meta").is_none());

    let with_meta = run(&args[..args.len() - 1]);
    assert!(stdout_json(&with_meta)["meta"]["timestamp"].is_u64());
}

#[test]
fn monte_carlo_is_independent_of_threads() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "edge.json", EDGE);
    let base = ["oracle", "--graph", s(&g), "--phi", DIPOLE, "--samples", "50000", "--seed", "9", "--no-meta"];
    let one = run(&base);
    let four = run(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn budget_guard_needs_force() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "edge.json", EDGE);
    let args = ["verify-bijection", "--graph", s(&g), "--sum-cap", "4", "--max-work", "100", "--no-meta"];
    let refused = run(&args);
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--max-work"));
    assert!(refused.stdout.is_empty());

    let forced = run(&[&args[..], &["--force"]].concat());
    assert_eq!(forced.status.code(), Some(0));
}

#[test]
fn out_flag_writes_file_and_leaves_input_untouched() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "triangle.json", TRIANGLE);
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "coeff-check",
        "--graph",
        s(&g),
        "--phi",
        DIPOLE,
        "--psi",
        r#"{"1":1,"2":-1}"#,
        "--degree-cap",
        "4",
        "--out",
        s(&out_path),
        "--no-meta",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["command"], "coeff-check");
    assert_eq!(doc["result"]["failures"], serde_json::json!([]));
    assert_eq!(fs::read_to_string(&g).unwrap(), TRIANGLE);
}

#[test]
fn compare_against_quadrature() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "edge.json", EDGE);
    let out = run(&["compare", "--graph", s(&g), "--phi", DIPOLE, "--degree-cap", "30", "--grid", "64", "--no-meta"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert!(doc["result"]["abs_diff"].as_f64().unwrap() < 1e-12);

    // a truncation this short misses the oracle by far more than the tolerance
    let short = run(&["compare", "--graph", s(&g), "--phi", DIPOLE, "--degree-cap", "1", "--grid", "64", "--no-meta"]);
    assert_eq!(short.status.code(), Some(1));
    assert_eq!(stdout_json(&short)["passed"], false);
}

#[test]
fn count_one_and_two_colors() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "edge.json", EDGE);
    let one = stdout_json(&run(&["count", "--graph", s(&g), "--phi", DIPOLE, "--sum-cap", "3", "--no-meta"]));
    let counts: Vec<&str> = one["result"]["per_N"].as_array().unwrap().iter().map(|r| r["count"].as_str().unwrap()).collect();
    // C(N, (N + 1) / 2) for odd N, zero otherwise
    assert_eq!(counts, ["0", "1", "0", "3"]);

    for method in ["direct", "multinomial"] {
        let two = stdout_json(&run(&[
            "count", "--graph", s(&g), "--phi", DIPOLE, "--psi", DIPOLE, "--sum-cap", "2", "--method", method, "--no-meta",
        ]));
        let rows = two["result"]["per_N"].as_array().unwrap();
        assert_eq!(rows[2]["count"], "2", "{method}");
    }
}

#[test]
fn check_ginibre_reports_nonnegative() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "triangle.json", TRIANGLE);
    let out = run(&[
        "check-ginibre", "--graph", s(&g), "--phi", DIPOLE, "--psi", r#"{"1":1,"2":-1}"#, "--degree-cap", "4", "--no-meta",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["result"]["nonnegative"], true);
}
