//! End-to-end checks of the CLI contract: exit codes, output schemas, and
//! determinism of study CSVs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geodesic-energy"))
}

fn tmp_file(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const EUCLIDEAN_CONFIG: &str = r#"{
    "metric": {"kind": "euclidean"},
    "x0": {"kind": "point", "p": [0.0, 0.0]},
    "x1": {"kind": "point", "p": [1.0, 1.0]},
    "n_segments": 8,
    "d_g": 1.4142135623730951
}"#;

const CONFORMAL_CONFIG: &str = r#"{
    "metric": {"kind": "conformal_cos"},
    "x0": {"kind": "point", "p": [0.0, 0.0]},
    "x1": {"kind": "point", "p": [12.566370614359172, 0.0]},
    "n_segments": 64,
    "d_g": 25.132741228718345
}"#;

#[test]
fn solve_euclidean_reports_straight_chord() {
    let config = tmp_file("euclid.json", EUCLIDEAN_CONFIG);
    let out = bin().arg("solve").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let energy = report["objective_value"].as_f64().unwrap();
    assert!((energy - 2.0).abs() < 1e-9);
    assert_eq!(report["minimizer"]["n_segments"], 8);
    assert_eq!(report["converged"], true);
}

#[test]
fn solve_conformal_recovers_minimal_length() {
    let config = tmp_file("conformal.json", CONFORMAL_CONFIG);
    let out = bin().arg("solve").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let length = report["continuous_length"].as_f64().unwrap();
    assert!((length - 8.0 * std::f64::consts::PI).abs() < 0.5);
}

#[test]
fn solve_writes_out_and_csv_files() {
    let config = tmp_file("euclid_files.json", EUCLIDEAN_CONFIG);
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let out_path = dir.join("report.json");
    let csv_path = dir.join("curve.csv");
    let out = bin()
        .arg("solve")
        .arg(&config)
        .arg("--out")
        .arg(&out_path)
        .arg("--csv")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("t,x_1,x_2\n"));
    assert_eq!(csv.lines().count(), 10); // header + 9 grid points
}

#[test]
fn unbounded_pair_is_a_config_error() {
    let config = tmp_file(
        "unbounded.json",
        r#"{
            "metric": {"kind": "euclidean"},
            "x0": {"kind": "half_space", "normal": [1.0, 0.0], "offset": 0.0},
            "x1": {"kind": "half_space", "normal": [-1.0, 0.0], "offset": -5.0}
        }"#,
    );
    let out = bin().arg("solve").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("at least one endpoint set must be bounded"));
}

#[test]
fn malformed_config_names_the_missing_field() {
    let config = tmp_file("broken.json", r#"{"x0": {"kind": "point", "p": [0,0]}}"#);
    let out = bin().arg("solve").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("metric"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_file_is_a_config_error() {
    let out = bin()
        .arg("solve")
        .arg("/nonexistent/config.json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_a_config_error() {
    let out = bin().arg("solve").arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn starved_iteration_budget_exits_with_two() {
    let config = tmp_file(
        "starved.json",
        r#"{
            "metric": {"kind": "conformal_cos"},
            "x0": {"kind": "point", "p": [0.0, 0.0]},
            "x1": {"kind": "point", "p": [12.566370614359172, 0.0]},
            "n_segments": 32,
            "solver": {"max_iters": 2}
        }"#,
    );
    let out = bin().arg("solve").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    // the report is still emitted for inspection
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["converged"], false);
}

#[test]
fn study_csv_has_stable_schema_and_slopes() {
    let config = tmp_file("study_euclid.json", EUCLIDEAN_CONFIG);
    let out = bin()
        .arg("study")
        .arg(&config)
        .arg("--n-list")
        .arg("4,8,16")
        .arg("--rule")
        .arg("both")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,rule,discrete_objective,continuous_energy,continuous_length,energy_error,length_error,envelope_lower,envelope_upper,iterations,wall_seconds"
    );
    let data: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(data.len(), 6); // 3 rungs x 2 rules
    assert!(text.contains("# energy_error_slope,trapezoidal,exact"));
    assert!(text.contains("# energy_error_slope,left,exact"));
    assert!(text.contains("# length_sq_error_slope,trapezoidal,exact"));
}

#[test]
fn study_is_deterministic_up_to_wall_seconds() {
    let config = tmp_file("study_det.json", CONFORMAL_CONFIG);
    let run = || {
        let out = bin()
            .arg("study")
            .arg(&config)
            .arg("--n-list")
            .arg("8,16,32")
            .arg("--rule")
            .arg("both")
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        stdout(&out)
            .lines()
            .map(|l| {
                if l.starts_with('#') {
                    l.to_string()
                } else {
                    // strip the wall_seconds column
                    l.rsplit_once(',')
                        .map(|(head, _)| head.to_string())
                        .unwrap()
                }
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn counterexample_table_pins_discrete_lengths_at_4pi() {
    let out = bin()
        .arg("counterexample")
        .arg("--n-list")
        .arg("8,16,32,64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let four_pi = 4.0 * std::f64::consts::PI;
    let eight_pi = 8.0 * std::f64::consts::PI;
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cols.len(), 6);
        assert!((cols[1] - four_pi).abs() <= 1e-12 * four_pi);
        assert!((cols[2] - four_pi).abs() <= 1e-12 * four_pi);
        assert!((cols[4] - eight_pi).abs() < 0.5);
        assert!((cols[5] - eight_pi).abs() <= 1e-12 * eight_pi);
        rows += 1;
    }
    assert_eq!(rows, 4);
}

#[test]
fn gradcheck_passes_on_builtin_metrics() {
    let config = tmp_file("gradcheck.json", CONFORMAL_CONFIG);
    let out = bin()
        .arg("gradcheck")
        .arg(&config)
        .arg("--samples")
        .arg("50")
        .arg("--seed")
        .arg("42")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("pass"));
}
