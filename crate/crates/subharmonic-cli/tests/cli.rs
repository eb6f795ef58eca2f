//! End-to-end checks of the command line binary: exit codes, error JSON,
//! report round-trips, and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subharmonic"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout_json(args: &[&str]) -> serde_json::Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_error(args: &[&str]) -> (i32, serde_json::Value) {
    let out = run(args);
    let code = out.status.code().expect("no signal");
    assert_ne!(code, 0, "expected failure");
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .find(|l| l.starts_with('{'))
        .expect("stderr carries a JSON error line");
    (code, serde_json::from_str(line).expect("error line is JSON"))
}

fn data_file(name: &str) -> String {
    let mut path = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    path.pop();
    path.pop();
    path.push("data");
    path.push(name);
    path.display().to_string()
}

fn without_timestamp(mut value: serde_json::Value) -> serde_json::Value {
    value
        .as_object_mut()
        .expect("report is an object")
        .remove("timestamp_unix");
    value
}

// =============================================================================
// Success paths
// =============================================================================

#[test]
fn select_json_report_has_schema_and_round_trips() {
    let value = stdout_json(&[
        "select", "--input", "hald", "--nu", "0.5", "--method", "laplace,bic", "--format",
        "json",
    ]);
    assert_eq!(value["schema"], 1);
    assert_eq!(value["command"], "select");
    assert_eq!(value["response"], "y");
    assert_eq!(value["reports"][0]["meta"]["n"], 13);
    assert_eq!(value["reports"][0]["meta"]["p"], 4);
    assert!(value["timestamp_unix"].as_u64().is_some());

    // Serialize-parse round trip preserves every numeric field bit-exactly.
    let reparsed: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&value).unwrap()).unwrap();
    assert_eq!(value, reparsed);
}

#[test]
fn builtin_token_and_file_path_agree() {
    let by_token = stdout_json(&[
        "select", "--input", "hald", "--nu", "0.5", "--method", "bic", "--format", "json",
    ]);
    let path = data_file("hald.csv");
    let by_path = stdout_json(&[
        "select", "--input", &path, "--nu", "0.5", "--method", "bic", "--format", "json",
    ]);
    // The reports must agree; only the input echo may differ.
    assert_eq!(by_token["reports"], by_path["reports"]);
}

#[test]
fn reports_are_deterministic_modulo_timestamp() {
    let args = [
        "select", "--input", "hald", "--nu", "0.95,0.5", "--method", "laplace,bic",
        "--format", "json",
    ];
    let first = without_timestamp(stdout_json(&args));
    let second = without_timestamp(stdout_json(&args));
    assert_eq!(first, second);

    let sim_args = [
        "simulate", "--design", "custom", "--p", "4", "--n", "40", "--true", "1,2",
        "--replicates", "6", "--seed", "7", "--nu", "0.5", "--method", "laplace,bic",
        "--format", "json",
    ];
    let first = without_timestamp(stdout_json(&sim_args));
    let second = without_timestamp(stdout_json(&sim_args));
    assert_eq!(first, second);
}

#[test]
fn thread_cap_does_not_change_results() {
    let args = [
        "select", "--input", "hald", "--nu", "0.5", "--method", "exact,laplace,bic",
        "--format", "json",
    ];
    let default_run = without_timestamp(stdout_json(&args));
    let capped = binary()
        .args(args)
        .env("SUBHARMONIC_THREADS", "1")
        .output()
        .expect("binary runs");
    assert!(capped.status.success());
    let capped_value: serde_json::Value = serde_json::from_slice(&capped.stdout).unwrap();
    assert_eq!(default_run, without_timestamp(capped_value));
}

#[test]
fn response_flag_moves_the_response_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    std::fs::write(&path, "target,a,b\n1.0,2.0,0.5\n2.0,1.0,1.5\n2.5,0.5,2.5\n4.0,3.0,3.5\n3.5,2.0,4.0\n5.0,4.5,5.5\n6.0,5.0,6.5\n5.5,4.0,7.0\n7.0,6.5,8.5\n8.0,7.0,9.0\n").unwrap();
    let value = stdout_json(&[
        "select",
        "--input",
        path.to_str().unwrap(),
        "--response",
        "target",
        "--nu",
        "0.5",
        "--method",
        "bic",
        "--format",
        "json",
    ]);
    assert_eq!(value["response"], "target");
    assert_eq!(value["reports"][0]["meta"]["p"], 2);
    let vars = value["reports"][0]["records"][2]["vars"].as_array().unwrap();
    assert_eq!(vars.len(), 2);
    assert_eq!(vars[0], "a");
    assert_eq!(vars[1], "b");
}

#[test]
fn csv_output_is_parseable_and_complete() {
    let out = run(&[
        "select", "--input", "hald", "--nu", "0.95,0.5", "--method", "laplace,bic",
        "--format", "csv",
    ]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        vec!["nu", "method", "rank", "model", "vars", "q", "r2", "log_bf", "posterior"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    // 15 models per block: laplace at two nus plus one bic block.
    assert_eq!(rows.len(), 3 * 15);
    // Posteriors parse back to numbers.
    for row in &rows {
        let p: f64 = row[8].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn pretty_top_limits_rows() {
    let out = run(&[
        "select", "--input", "hald", "--nu", "0.5", "--method", "laplace", "--top", "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("rank"));
    assert!(text.lines().any(|l| l.starts_with("1     ")));
    assert!(text.lines().any(|l| l.starts_with("2     ")));
    assert!(!text.lines().any(|l| l.starts_with("3     ")));
}

#[test]
fn output_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "select",
        "--input",
        "hald",
        "--nu",
        "0.5",
        "--method",
        "bic",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(value["schema"], 1);
}

#[test]
fn bench_laplace_error_shrinks_with_n() {
    let out = run(&[
        "bench-laplace", "--n-grid", "100,1000", "--q", "2", "--nu", "0.5", "--r", "0.5",
    ]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let err_small: f64 = rows[0][3].parse().unwrap();
    let err_large: f64 = rows[1][3].parse().unwrap();
    assert!(err_large < err_small);
}

// =============================================================================
// Failure paths
// =============================================================================

#[test]
fn missing_input_fails_with_io_error() {
    let (code, error) = stderr_error(&["select", "--input", "nowhere.csv", "--nu", "0.5"]);
    assert_eq!(code, 1);
    assert_eq!(error["schema"], 1);
    assert_eq!(error["error"]["code"], "IoError");
}

#[test]
fn string_cell_fails_naming_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b,y\n1,2,3\n4,oops,6\n").unwrap();
    let (_, error) = stderr_error(&["select", "--input", path.to_str().unwrap(), "--nu", "0.5"]);
    assert_eq!(error["error"]["code"], "ParseError");
    let message = error["error"]["message"].as_str().unwrap();
    assert!(message.contains("row 3"), "message: {message}");
    assert!(message.contains("column b"), "message: {message}");
}

#[test]
fn ragged_row_fails_with_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ragged.csv");
    std::fs::write(&path, "a,b,y\n1,2,3\n4,5\n").unwrap();
    let (_, error) = stderr_error(&["select", "--input", path.to_str().unwrap(), "--nu", "0.5"]);
    assert_eq!(error["error"]["code"], "ParseError");
}

#[test]
fn headers_without_rows_fail_with_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "a,b,y\n").unwrap();
    let (_, error) = stderr_error(&["select", "--input", path.to_str().unwrap(), "--nu", "0.5"]);
    assert_eq!(error["error"]["code"], "EmptyFile");
}

#[test]
fn invalid_flags_fail_before_any_work() {
    let (_, error) = stderr_error(&["select", "--input", "hald", "--variant", "sideways"]);
    assert_eq!(error["error"]["code"], "BadFlag");

    let (_, error) = stderr_error(&["select", "--input", "hald", "--method", "magic"]);
    assert_eq!(error["error"]["code"], "DomainError");

    let (_, error) = stderr_error(&[
        "select", "--input", "hald", "--nu", "0.5", "--method", "exact", "--rel-tol", "0.5",
    ]);
    assert_eq!(error["error"]["code"], "DomainError");

    // nu = 5 exceeds every candidate q, and the laplace method requires
    // nu < 1; both must fail up front.
    let (_, error) = stderr_error(&["select", "--input", "hald", "--nu", "5", "--method", "laplace"]);
    assert_eq!(error["error"]["code"], "DomainError");
}

#[test]
fn nonrobust_nu_warns_on_stderr() {
    let out = run(&[
        "select", "--input", "hald", "--nu", "-1", "--method", "laplace", "--format", "json",
    ]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("Gaussian-motivated, not distribution-robust"),
        "stderr: {stderr}"
    );
    // In-range exponents stay quiet.
    let out = run(&[
        "select", "--input", "hald", "--nu", "0.5", "--method", "laplace", "--format", "json",
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(!stderr.contains("warning"), "stderr: {stderr}");
}

#[test]
fn laplace_with_check_variant_is_rejected() {
    let (_, error) = stderr_error(&[
        "select", "--input", "hald", "--nu", "0.5", "--method", "laplace", "--variant",
        "check",
    ]);
    assert_eq!(error["error"]["code"], "DomainError");
}

#[test]
fn null_prior_needs_check_variant_for_integral_methods() {
    let (_, error) = stderr_error(&[
        "select", "--input", "hald", "--nu", "0.5", "--method", "exact", "--prior",
        "uniform-null",
    ]);
    assert_eq!(error["error"]["code"], "NullModelForbidden");
    // With the check variant the same request succeeds.
    let value = stdout_json(&[
        "select", "--input", "hald", "--nu", "0.5", "--method", "exact", "--prior",
        "uniform-null", "--variant", "check", "--format", "json",
    ]);
    assert_eq!(value["reports"][0]["records"][0]["model"], 0);
}

#[test]
fn custom_design_flag_validation() {
    let (_, error) = stderr_error(&[
        "simulate", "--design", "custom", "--true", "1,2", "--replicates", "4",
    ]);
    assert_eq!(error["error"]["code"], "BadFlag"); // missing --p

    let (_, error) = stderr_error(&[
        "simulate", "--design", "custom", "--p", "4", "--true", "9", "--replicates", "4",
    ]);
    assert_eq!(error["error"]["code"], "BadFlag"); // index out of range

    let (_, error) = stderr_error(&[
        "simulate", "--design", "paper-6.1", "--qt", "5", "--replicates", "4",
    ]);
    assert_eq!(error["error"]["code"], "DomainError"); // qt not in {4,8,12,16}

    let (_, error) = stderr_error(&["simulate", "--design", "unknown"]);
    assert_eq!(error["error"]["code"], "BadFlag");
}

#[test]
fn simulate_csv_has_one_row_per_entry() {
    let out = run(&[
        "simulate", "--design", "custom", "--p", "4", "--n", "40", "--true", "1,2",
        "--replicates", "5", "--nu", "0.95,0.5", "--method", "laplace,bic", "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    // laplace at two nus, bic once.
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let rank1: f64 = row[2].parse().unwrap();
        let top3: f64 = row[3].parse().unwrap();
        assert!(rank1 <= top3);
    }
}
