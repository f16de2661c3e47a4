//! End-to-end checks of the command-line surface: flags, exit codes, and
//! byte-stable CSV/JSON output.

use std::process::{Command, Output};

fn inbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inbl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn simulate_single_known_number() {
    let out = inbl(&[
        "simulate-single",
        "--bits",
        "32",
        "--seed",
        "7",
        "--hat",
        "1",
        "--number",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "deficient_hat,clocks_used,witness_numerator,witness_scale,witness_magnitude"
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "hat1");
    assert_eq!(fields[1], "1");
    // Number 2 at 32 bits has 31 zero bits: witness is ±2 / 2^32 = ±2^-31.
    assert!(fields[2] == "2" || fields[2] == "-2");
    assert_eq!(fields[3], "32");
    assert_eq!(fields[4], "2^-31");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "simulate-single",
        "--bits",
        "16",
        "--seed",
        "99",
        "--output",
        "json",
    ];
    assert_eq!(inbl(&args).stdout, inbl(&args).stdout);

    let histogram_args = ["histogram", "--trials", "2000", "--seed", "5"];
    assert_eq!(inbl(&histogram_args).stdout, inbl(&histogram_args).stdout);
}

#[test]
fn hex_and_decimal_seeds_agree() {
    let hex = inbl(&["simulate-single", "--seed", "0x2a", "--output", "json"]);
    let dec = inbl(&["simulate-single", "--seed", "42", "--output", "json"]);
    assert_eq!(exit_code(&hex), 0);
    assert_eq!(hex.stdout, dec.stdout);
}

#[test]
fn single_json_keys_are_stable() {
    let out = inbl(&["simulate-single", "--seed", "3", "--output", "json"]);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    for key in [
        "deficient_hat",
        "clocks_used",
        "witness_numerator",
        "witness_scale",
        "witness_magnitude",
    ] {
        assert!(value.get(key).is_some(), "missing key {key}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(exit_code(&inbl(&["simulate-single", "--bits", "0"])), 2);
    assert_eq!(
        exit_code(&inbl(&["simulate-double", "--p", "5", "--q", "5"])),
        2
    );
    assert_eq!(exit_code(&inbl(&["trace", "--signal", "bogus"])), 2);
    assert_eq!(exit_code(&inbl(&["simulate-single", "--bogus-flag"])), 2);
    assert_eq!(
        exit_code(&inbl(&["simulate-single", "--number", "maybe"])),
        2
    );
    // Number out of range for the bit width.
    assert_eq!(
        exit_code(&inbl(&["simulate-single", "--bits", "4", "--number", "16"])),
        2
    );
}

#[test]
fn unequal_zero_counts_decide_in_one_clock() {
    let out = inbl(&[
        "simulate-double",
        "--bits",
        "32",
        "--p",
        "3",
        "--q",
        "1",
        "--seed",
        "12",
        "--output",
        "json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["outcome"], "decided");
    assert_eq!(value["clocks_used"], 1);
    let missing = [
        value["hat1_missing"].as_u64().unwrap(),
        value["hat2_missing"].as_u64().unwrap(),
    ];
    assert!(missing == [3, 1] || missing == [1, 3]);
}

#[test]
fn histogram_single_trial_is_one_full_bucket() {
    let out = inbl(&["histogram", "--trials", "1", "--seed", "9"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "clocks,count,fraction,analytic");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[1], "1");
    assert_eq!(fields[2], "1");
}

#[test]
fn histogram_fractions_track_the_analytic_column() {
    let out = inbl(&["histogram", "--trials", "20000", "--seed", "4"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let count: f64 = fields[1].parse().unwrap();
        let fraction: f64 = fields[2].parse().unwrap();
        let analytic: f64 = fields[3].parse().unwrap();
        if count >= 100.0 {
            assert!(
                (fraction - analytic).abs() < 0.3 * analytic,
                "bucket {line} strays from the analytic law"
            );
        }
    }
}

#[test]
fn product_trace_has_constant_magnitude() {
    let out = inbl(&[
        "trace",
        "--signal",
        "product:2",
        "--bits",
        "32",
        "--clocks",
        "64",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "clock,numerator,scale,approx");
    assert_eq!(lines.len(), 65);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert!(fields[1] == "2" || fields[1] == "-2");
        assert_eq!(fields[2], "32");
    }
}

#[test]
fn distorted_trace_adds_a_column() {
    let plain = inbl(&[
        "trace", "--signal", "universe", "--bits", "8", "--clocks", "5",
    ]);
    let distorted = inbl(&[
        "trace",
        "--signal",
        "universe",
        "--bits",
        "8",
        "--clocks",
        "5",
        "--distort",
    ]);
    let plain_text = stdout(&plain);
    let distorted_text = stdout(&distorted);
    assert!(plain_text.starts_with("clock,numerator,scale,approx\n"));
    assert!(distorted_text.starts_with("clock,numerator,scale,approx,distorted\n"));
    assert_eq!(plain_text.lines().count(), distorted_text.lines().count());
}

#[test]
fn hat_minus_trace_runs() {
    let out = inbl(&[
        "trace",
        "--signal",
        "hat-minus:2",
        "--bits",
        "32",
        "--clocks",
        "16",
        "--distort",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 17);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let to_stdout = inbl(&["trace", "--signal", "universe", "--clocks", "10"]);
    let to_file = inbl(&[
        "trace",
        "--signal",
        "universe",
        "--clocks",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&to_file), 0);
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn unwritable_out_path_exits_one() {
    let out = inbl(&[
        "histogram",
        "--trials",
        "1",
        "--out",
        "/nonexistent-dir/h.csv",
    ]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn verify_opcount_passes() {
    let out = inbl(&["verify", "--suite", "opcount"]);
    assert_eq!(exit_code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["suite"], "opcount");
    assert_eq!(value["pass"], true);
    assert!(value["checks"].as_array().unwrap().len() >= 5);
}
