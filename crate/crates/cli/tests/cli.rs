//! End-to-end tests of the `bandlab` binary: file formats, exit codes,
//! and report shape.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bandlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bandlab-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

const TREE_BAND: &str = r#"{
    "factor1": {"kind": "tree", "edges": [[0,1,4.0],[1,2,5.0],[1,3,6.0],[0,4,7.0],[4,5,8.0]], "root": 0},
    "factor2": {"kind": "tree", "edges": [[0,1,6.0],[0,2,9.0],[1,3,8.0],[2,4,7.0]], "root": 0},
    "delta": 1.0,
    "anchor": "radial",
    "metric": "max"
}"#;

#[test]
fn delta_reads_csv_and_json_matrices() {
    let dir = temp_dir("delta");
    let csv = write(
        &dir,
        "square.csv",
        "0,1,1.4142135623730951,1\n1,0,1,1.4142135623730951\n1.4142135623730951,1,0,1\n1,1.4142135623730951,1,0\n",
    );
    let out = bandlab(&["delta", csv.to_str().unwrap(), "--base", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let delta = report["measurements"]["four_point_delta"].as_f64().unwrap();
    assert!((delta - (2.0f64.sqrt() - 1.0)).abs() < 1e-12);

    let json = write(
        &dir,
        "line.json",
        r#"{"labels": ["a","b","c"], "base": 1, "dist": [[0,1,2],[1,0,1],[2,1,0]]}"#,
    );
    let out = bandlab(&["delta", json.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["measurements"]["four_point_delta"], 0.0);
}

#[test]
fn delta_rejects_invalid_matrices() {
    let dir = temp_dir("invalid");
    let bad = write(&dir, "bad.csv", "0,3\n3,0\nextra");
    let out = bandlab(&["delta", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let violation = write(&dir, "tri.csv", "0,1,3\n1,0,1\n3,1,0\n");
    let out = bandlab(&["delta", violation.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("triangle"), "stderr: {err}");
}

#[test]
fn delta_csv_format_emits_defect_table() {
    let dir = temp_dir("deltacsv");
    let csv = write(&dir, "m.csv", "0,1,2\n1,0,1\n2,1,0\n");
    let out = bandlab(&["delta", csv.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("i,j,k,l,defect"));
}

#[test]
fn band_sample_writes_points_and_matrix() {
    let dir = temp_dir("sample");
    let band = write(&dir, "band.json", TREE_BAND);
    let pts = dir.join("pts.json");
    let matrix = dir.join("matrix.json");
    let out = bandlab(&[
        "band-sample",
        band.to_str().unwrap(),
        "-n",
        "12",
        "--seed",
        "9",
        "--radius-cap",
        "8.0",
        "-o",
        pts.to_str().unwrap(),
        "--emit-matrix",
        matrix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let payload: serde_json::Value = serde_json::from_str(&fs::read_to_string(&pts).unwrap()).unwrap();
    assert_eq!(payload["points"].as_array().unwrap().len(), 12);

    // The emitted matrix is a valid input for `delta`.
    let out = bandlab(&["delta", matrix.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let delta = report["measurements"]["four_point_delta"].as_f64().unwrap();
    assert!(delta <= 1.0 + 1e-9, "band sample delta {delta}");

    // Same seed, same bytes.
    let pts2 = dir.join("pts2.json");
    let out = bandlab(&[
        "band-sample",
        band.to_str().unwrap(),
        "-n",
        "12",
        "--seed",
        "9",
        "--radius-cap",
        "8.0",
        "-o",
        pts2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(&pts).unwrap(),
        fs::read_to_string(&pts2).unwrap()
    );
}

#[test]
fn theorem1_report_shape_and_exit_codes() {
    let dir = temp_dir("thm1");
    let config = write(
        &dir,
        "config.json",
        &format!(r#"{{"band": {TREE_BAND}, "n": 20, "radius_cap": 8.0, "seed": 3}}"#),
    );
    let out = bandlab(&["theorem1", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["config", "measurements", "criteria", "duration_ms"] {
        assert!(report.get(key).is_some(), "missing top-level key {key}");
    }
    assert!(report["criteria"].as_array().unwrap().iter().all(|c| {
        c["pass"].as_bool().unwrap() && c["lhs"].is_number() && c["rhs"].is_number()
    }));

    // An unsatisfiable tolerance forces a criterion failure: exit code 1.
    let out = bandlab(&[
        "theorem1",
        config.to_str().unwrap(),
        "--tolerance",
        "-100.0",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Missing config: exit code 2.
    let out = bandlab(&["theorem1", dir.join("nope.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn probe_subcommand_classifies_band_sequences() {
    let dir = temp_dir("probe");
    // Two diagonal marches down distinct verticals in an H2×H2 band.
    let mut seq_a = Vec::new();
    let mut seq_b = Vec::new();
    for j in 0..25 {
        let level = j as f64;
        let y = (-level).exp();
        let mk = |offset: f64| {
            serde_json::json!({
                "p1": {"h2": {"x": offset, "y": y}},
                "p2": {"h2": {"x": offset, "y": y}},
            })
        };
        // Fixed abscissa offsets 1 and 3.
        seq_a.push(mk(1.0));
        seq_b.push(mk(3.0));
    }
    let file = serde_json::json!({
        "band": {
            "factor1": {"kind": "h2", "base": [0.0, 1.0]},
            "factor2": {"kind": "h2", "base": [0.0, 1.0]},
            "delta": 0.5,
            "anchor": "busemann",
            "metric": "max"
        },
        "sequences": [seq_a, seq_b],
        "window": 5,
        "threshold": 15.0
    });
    let path = write(&dir, "seqs.json", &file.to_string());
    let out = bandlab(&["probe", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let probe = &report["measurements"]["probe"];
    assert_eq!(probe["first_converges"], serde_json::json!(true));
    assert_eq!(probe["second_converges"], serde_json::json!(true));
    assert_eq!(probe["equivalent"], serde_json::json!(false));
}

#[test]
fn h2_probe_points_respect_the_input_gate() {
    // Deep points (y below the input threshold) are rejected at parse
    // time rather than silently clamped.
    let dir = temp_dir("gate");
    let file = serde_json::json!({
        "band": {
            "factor1": {"kind": "h2", "base": [0.0, 1.0]},
            "factor2": {"kind": "h2", "base": [0.0, 1.0]},
            "delta": 0.5,
            "anchor": "busemann",
            "metric": "max"
        },
        "sequences": [
            [{"p1": {"h2": {"x": 0.0, "y": 1e-15}}, "p2": {"h2": {"x": 0.0, "y": 1e-15}}},
             {"p1": {"h2": {"x": 0.0, "y": 1.0}}, "p2": {"h2": {"x": 0.0, "y": 1.0}}}],
            [{"p1": {"h2": {"x": 1.0, "y": 1.0}}, "p2": {"h2": {"x": 1.0, "y": 1.0}}},
             {"p1": {"h2": {"x": 2.0, "y": 1.0}}, "p2": {"h2": {"x": 2.0, "y": 1.0}}}]
        ],
        "window": 2,
        "threshold": 1.0
    });
    let path = write(&dir, "seqs.json", &file.to_string());
    let out = bandlab(&["probe", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
