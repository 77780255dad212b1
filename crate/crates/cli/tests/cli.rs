//! End-to-end tests against the compiled binary: file formats, exit
//! codes, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bellwigner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellwigner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("readable output file")
}

#[test]
fn scan_coarse_grid_shape() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let result = bellwigner(&["scan", "--step-deg", "90", "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5); // header + 2×2 grid
    assert_eq!(
        lines[0],
        "theta2_deg,theta3_deg,bell_margin,wigner1_margin,wigner2_margin,feasible,t_lo,t_hi"
    );
}

#[test]
fn scan_single_cell_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("one.csv");
    let result = bellwigner(&["scan", "--step-deg", "180", "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    assert_eq!(read(&out).lines().count(), 2); // header + single cell
}

#[test]
fn scan_violation_cell_row() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let result = bellwigner(&["scan", "--step-deg", "30", "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let text = read(&out);
    let row = text
        .lines()
        .find(|line| line.starts_with("60,90,"))
        .expect("row for (60°, 90°)");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[2], "-1"); // bell margin
    assert_eq!(fields[3], "-0.25"); // first Wigner margin
    assert_eq!(fields[5], "0"); // infeasible
}

#[test]
fn scan_is_byte_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(
        bellwigner(&["scan", "--step-deg", "10", "--out", a.to_str().unwrap()])
            .status
            .success()
    );
    assert!(bellwigner(&[
        "scan",
        "--step-deg",
        "10",
        "--threads",
        "3",
        "--out",
        b.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn scan_requires_an_output() {
    let result = bellwigner(&["scan", "--step-deg", "90"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn scan_rejects_nonpositive_step() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let result = bellwigner(&["scan", "--step-deg", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let result = bellwigner(&["scan", "--step-deg", "90", "--frobnicate"]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn unwritable_path_exits_three() {
    let result = bellwigner(&[
        "scan",
        "--step-deg",
        "90",
        "--out",
        "/nonexistent-dir/s.csv",
    ]);
    assert_eq!(result.status.code(), Some(3));
}

#[test]
fn pgm_header_and_violation_pixel() {
    let dir = TempDir::new().unwrap();
    let pgm = dir.path().join("bell.pgm");
    let result = bellwigner(&["scan", "--step-deg", "30", "--pgm", pgm.to_str().unwrap()]);
    assert!(result.status.success());
    let text = read(&pgm);
    let mut tokens = text.split_ascii_whitespace();
    assert_eq!(tokens.next(), Some("P2"));
    assert_eq!(tokens.next(), Some("6"));
    assert_eq!(tokens.next(), Some("6"));
    assert_eq!(tokens.next(), Some("255"));
    let pixels: Vec<u32> = tokens.map(|t| t.parse().unwrap()).collect();
    assert_eq!(pixels.len(), 36);
    // Row 2 (θ2 = 60°), column 3 (θ3 = 90°): Bell violated.
    assert_eq!(pixels[2 * 6 + 3], 0);
    assert!(pixels.iter().all(|&p| p == 0 || p == 128 || p == 255));
}

#[test]
fn union_check_channel_is_all_white() {
    let dir = TempDir::new().unwrap();
    let pgm = dir.path().join("union.pgm");
    let result = bellwigner(&[
        "scan",
        "--step-deg",
        "2",
        "--pgm",
        pgm.to_str().unwrap(),
        "--pgm-channel",
        "union-check",
    ]);
    assert!(result.status.success());
    let text = read(&pgm);
    let pixels: Vec<u32> = text
        .split_ascii_whitespace()
        .skip(4)
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(pixels.len(), 90 * 90);
    assert!(
        pixels.iter().all(|&p| p == 255),
        "disagreement or boundary pixels found"
    );
}

#[test]
fn solve_reports_empty_interval_and_quasi_entry() {
    let result = bellwigner(&["solve", "--theta2-deg", "60", "--theta3-deg", "90"]);
    assert!(result.status.success());
    let text = stdout(&result);
    assert!(text.contains("feasibility_interval: empty"), "{text}");
    assert!(text.contains("q(+1,-1,-1) = -0.25"), "{text}");
    assert!(text.contains("quasi: true"), "{text}");
}

#[test]
fn solve_reports_feasible_interval() {
    let result = bellwigner(&["solve", "--theta2-deg", "60", "--theta3-deg", "120"]);
    assert!(result.status.success());
    let text = stdout(&result);
    assert!(
        text.contains("feasibility_interval: [0.25, 0.375]"),
        "{text}"
    );
    assert!(text.contains("quasi: false"), "{text}");
}

#[test]
fn simulate_writes_count_table_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("counts.csv");
    let args = [
        "simulate",
        "--theta2-deg",
        "60",
        "--theta3-deg",
        "90",
        "--n",
        "9000",
        "--seed",
        "42",
        "--out",
    ];
    let mut first = args.to_vec();
    first.push(out.to_str().unwrap());
    let run1 = bellwigner(&first);
    assert!(run1.status.success());
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "config,zj,zk,count");
    assert_eq!(lines.len(), 14);
    assert_eq!(lines[13], "TOTAL,,,9000");
    let report = stdout(&run1);
    assert!(report.contains("satisfied=true"), "{report}");
    assert!(
        report.contains("configuration_probabilities: 1/3 1/3 1/3"),
        "{report}"
    );

    let out2 = dir.path().join("counts2.csv");
    let mut second = args.to_vec();
    second.push(out2.to_str().unwrap());
    let run2 = bellwigner(&second);
    assert_eq!(run1.stdout, run2.stdout);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn simulate_weighted_assignment_parses() {
    let result = bellwigner(&[
        "simulate",
        "--theta2-deg",
        "45",
        "--theta3-deg",
        "90",
        "--n",
        "3000",
        "--assignment",
        "weighted:0.5,0.3,0.2",
    ]);
    assert!(result.status.success());
    let bad = bellwigner(&[
        "simulate",
        "--theta2-deg",
        "45",
        "--theta3-deg",
        "90",
        "--n",
        "3000",
        "--assignment",
        "weighted:0.5,0.6,0.2",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn enumerate_smoke_summary_and_histogram() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("hist.csv");
    let result = bellwigner(&[
        "enumerate",
        "--denominator",
        "4",
        "--mode",
        "full",
        "--threads",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let text = stdout(&result);
    assert_eq!(text, "tuples,min_margin_numerator,denominator\n27405,0,4\n");
    let histogram = read(&out);
    let mut lines = histogram.lines();
    assert_eq!(lines.next(), Some("bin_lo,bin_hi,count"));
    let total: u64 = lines
        .map(|line| line.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 27_405);
}

#[test]
fn enumerate_guard_refuses_large_full_runs() {
    let result = bellwigner(&["enumerate", "--denominator", "11", "--mode", "full"]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8(result.stderr).unwrap();
    // C(11 + 26, 26) compositions.
    assert!(
        stderr.contains("854992152"),
        "guard message lacks the count: {stderr}"
    );
}

#[test]
fn enumerate_sampling_deterministic() {
    let args = [
        "enumerate",
        "--denominator",
        "20",
        "--mode",
        "sample:400",
        "--seed",
        "11",
    ];
    let a = bellwigner(&args);
    let mut with_threads = args.to_vec();
    with_threads.extend(["--threads", "2"]);
    let b = bellwigner(&with_threads);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.lines().nth(1).unwrap().starts_with("400,"), "{text}");
}

#[test]
fn check_all_suites_pass() {
    let result = bellwigner(&["check", "--suite", "all"]);
    assert!(result.status.success());
    let text = stdout(&result);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}
