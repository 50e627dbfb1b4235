//! End-to-end tests of the command-line surface: file round trips, exit
//! codes, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use classeval::matrix::LabelSpace;
use classeval::metrics::{self, MetricId};
use classeval::ConfusionMatrix;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_classeval"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn worked_example_json(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("worked.json");
    fs::write(
        &path,
        r#"{"labels": ["x", "y"], "matrix": [[15, 5], [10, 10]]}"#,
    )
    .unwrap();
    path
}

#[test]
fn evaluate_matches_the_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let input = worked_example_json(dir.path());
    let output = run(&[
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let entries: Vec<serde_json::Value> = serde_json::from_str(&stdout(&output)).unwrap();

    let matrix = ConfusionMatrix::from_rows(
        LabelSpace::new(["x", "y"]).unwrap(),
        vec![vec![15.0, 5.0], vec![10.0, 10.0]],
    )
    .unwrap();
    let expected = metrics::evaluate_all(&matrix, &MetricId::default_roster());
    assert_eq!(entries.len(), expected.len());
    for (entry, score) in entries.iter().zip(&expected) {
        assert_eq!(entry["metric"].as_str().unwrap(), score.metric.to_string());
        let value = entry["value"].as_f64().unwrap();
        assert_eq!(value.to_bits(), score.value.to_bits());
    }
}

#[test]
fn evaluate_specific_metrics_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = worked_example_json(dir.path());
    let output = run(&[
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--metrics",
        "accuracy,macro_precision",
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("accuracy,0.625"));
    assert!(text.contains("macro_precision,0.625"));
}

#[test]
fn evaluate_perfect_predictions_scores_one_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("perfect.csv");
    fs::write(&input, "gold,pred\na,a\nb,b\nc,c\na,a\n").unwrap();
    let output = run(&[
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let entries: Vec<serde_json::Value> = serde_json::from_str(&stdout(&output)).unwrap();
    for entry in entries {
        let metric = entry["metric"].as_str().unwrap();
        let value = entry["value"].as_f64().unwrap();
        if metric == "bookmaker_win" {
            // Mass 4 over 3 classes pays 4 * (3 - 1).
            assert!((value - 8.0).abs() < 1e-12);
        } else {
            assert!((value - 1.0).abs() < 1e-12, "{metric} = {value}");
        }
    }
}

#[test]
fn evaluate_unknown_label_reports_line_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "gold,pred\nx,x\nz,x\n").unwrap();
    let output = run(&[
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--labels",
        "x,y",
    ]);
    assert_eq!(output.status.code(), Some(2));
    let err = stderr(&output);
    assert!(err.contains("line 3"), "stderr: {err}");
    assert!(err.contains('z'));
}

#[test]
fn evaluate_calibrated_flag_turns_accuracy_into_macro_recall() {
    let dir = tempfile::tempdir().unwrap();
    let input = worked_example_json(dir.path());
    let output = run(&[
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--calibrated",
        "--metrics",
        "accuracy",
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("0.6333333333333333"));
}

#[test]
fn calibrate_round_trips_through_matrix_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = worked_example_json(dir.path());
    let output = run(&["calibrate", "--input", input.to_str().unwrap()]);
    assert!(output.status.success());
    let emitted: ConfusionMatrix = serde_json::from_str(&stdout(&output)).unwrap();

    let matrix = ConfusionMatrix::from_rows(
        LabelSpace::new(["x", "y"]).unwrap(),
        vec![vec![15.0, 5.0], vec![10.0, 10.0]],
    )
    .unwrap();
    assert_eq!(emitted, matrix.calibrate().unwrap());
    let err = stderr(&output);
    assert!(err.contains("0.8"), "stderr: {err}");
    assert!(err.contains("1.3333333333333333"));
}

#[test]
fn calibrate_refuses_zero_prevalence_naming_the_class() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("zero.json");
    fs::write(
        &input,
        r#"{"labels": ["x", "y"], "matrix": [[3, 0], [2, 0]]}"#,
    )
    .unwrap();
    let output = run(&["calibrate", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("`y`"));
}

#[test]
fn check_rejects_zero_trials_as_usage() {
    let output = run(&["check", "--trials", "0"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn check_single_property_prints_a_witness() {
    let output = run(&[
        "check",
        "--metrics",
        "mcc",
        "--property",
        "monotonicity",
        "--trials",
        "200",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("Refuted"));
    assert!(text.contains("add 1 at"), "output: {text}");
}

#[test]
fn check_output_is_byte_deterministic() {
    let args = [
        "check",
        "--metrics",
        "weighted_f1,kappa",
        "--trials",
        "300",
        "--format",
        "json",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn compare_identical_systems_tie_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("sys_a.csv");
    let b = dir.path().join("sys_b.csv");
    let rows = "gold,pred\nx,x\nx,x\nx,y\ny,y\ny,y\ny,x\n";
    fs::write(&a, rows).unwrap();
    fs::write(&b, rows).unwrap();
    let out_dir = dir.path().join("report");
    let output = run(&[
        "compare",
        "--inputs",
        a.to_str().unwrap(),
        "--inputs",
        b.to_str().unwrap(),
        "--metrics",
        "accuracy,macro_f1",
        "--ensemble",
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let ranking = fs::read_to_string(out_dir.join("ranking.csv")).unwrap();
    let lines: Vec<&str> = ranking.lines().collect();
    assert_eq!(lines.len(), 3);
    let row_a: Vec<&str> = lines[1].split(',').collect();
    let row_b: Vec<&str> = lines[2].split(',').collect();
    // Same scores, tied fractional ranks.
    assert_eq!(row_a[1..], row_b[1..]);
    assert!(row_a[3].starts_with("1.5"));
    let ensemble = stdout(&output);
    assert!(ensemble.contains("winner(s): sys_a, sys_b"), "{ensemble}");
}

#[test]
fn compare_equivalent_columns_rank_identically() {
    let dir = tempfile::tempdir().unwrap();
    let matrices = [
        r#"{"labels": ["a", "b", "c"], "matrix": [[8, 2, 1], [1, 7, 2], [1, 1, 7]]}"#,
        r#"{"labels": ["a", "b", "c"], "matrix": [[5, 1, 3], [3, 6, 1], [2, 3, 6]]}"#,
        r#"{"labels": ["a", "b", "c"], "matrix": [[9, 4, 2], [1, 5, 2], [1, 1, 6]]}"#,
    ];
    let mut inputs = Vec::new();
    for (i, text) in matrices.iter().enumerate() {
        let path = dir.path().join(format!("team{i}.json"));
        fs::write(&path, text).unwrap();
        inputs.push(path);
    }
    let output = run(&[
        "compare",
        "--inputs",
        inputs[0].to_str().unwrap(),
        "--inputs",
        inputs[1].to_str().unwrap(),
        "--inputs",
        inputs[2].to_str().unwrap(),
        "--metrics",
        "macro_recall,kappa~",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    let ranking: Vec<&str> = text.split("\n\n").next().unwrap().lines().collect();
    let header: Vec<&str> = ranking[0].split(',').collect();
    let rank_recall = header
        .iter()
        .position(|h| *h == "rank:macro_recall:p=1")
        .unwrap();
    let rank_kappa = header.iter().position(|h| *h == "rank:kappa~").unwrap();
    for line in &ranking[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[rank_recall], fields[rank_kappa], "line: {line}");
    }
    // The correlation block reports rho = 1 for the pair.
    let correlation = text.split("\n\n").nth(1).unwrap();
    let pair_line = correlation
        .lines()
        .find(|l| l.starts_with("macro_recall:p=1"))
        .unwrap();
    assert!(pair_line.ends_with(",1"), "line: {pair_line}");
}

#[test]
fn compare_rejects_mismatched_label_spaces() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    fs::write(&a, r#"{"labels": ["x", "y"], "matrix": [[1, 0], [0, 1]]}"#).unwrap();
    fs::write(&b, r#"{"labels": ["p", "q"], "matrix": [[1, 0], [0, 1]]}"#).unwrap();
    let output = run(&[
        "compare",
        "--inputs",
        a.to_str().unwrap(),
        "--inputs",
        b.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn project_recovers_precisions_from_matched_distributions() {
    let output = run(&[
        "project",
        "--recalls",
        "0.6,0.6666666666666666",
        "--class-dist",
        "0.625,0.375",
        "--pred-dist",
        "0.5,0.5",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let estimates = value["estimates"].as_array().unwrap();
    assert!((estimates[0].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!((estimates[1].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn project_rejects_distributions_that_do_not_sum_to_one() {
    let output = run(&[
        "project",
        "--recalls",
        "0.5,0.5",
        "--class-dist",
        "0.4,0.4",
        "--pred-dist",
        "0.5,0.5",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn project_requires_a_complete_input() {
    let output = run(&["project", "--recalls", "0.5,0.5"]);
    assert_eq!(output.status.code(), Some(1));
}
