use std::path::Path;
use std::process::{Command, Output};

use gravilon::harness::{read_csv, CSV_HEADER};

fn gravilon(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gravilon"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

const QUICK: &[&str] = &[
    "--synthetic",
    "--synthetic-train",
    "400",
    "--synthetic-test",
    "100",
    "--steps",
    "12",
    "--batch",
    "32",
];

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"], &["accuracy", "--help"], &["steps", "--help"]] {
        let out = gravilon(args, dir.path());
        assert_eq!(out.status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["accuracy", "--trials", "many"],
        &["accuracy", "--synthetic", "--methods", "sgd,nonsense"],
        &["accuracy", "--synthetic", "--trials", "0"],
        &["testbed", "--objective", "saddle"],
        &["gradcheck", "--epsilon", "0.5"],
    ] {
        let out = gravilon(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn missing_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravilon(&["accuracy", "--data-dir", "no/such/dir", "--steps", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_three_and_marks_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["accuracy", "--methods", "sgd:1e308", "--clip", "0", "--out", "div.csv"];
    args.extend_from_slice(QUICK);
    let out = gravilon(&args, dir.path());
    assert_eq!(out.status.code(), Some(3));
    let rows = read_csv(std::fs::read_to_string(dir.path().join("div.csv")).unwrap().as_bytes()).unwrap();
    assert!(rows[0].failed);
}

#[test]
fn accuracy_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["accuracy", "--methods", "gravilon,adagrad:0.01", "--trials", "2", "--out", "r.csv"];
    args.extend_from_slice(QUICK);
    let out = gravilon(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with(CSV_HEADER));
    let rows = read_csv(csv.as_bytes()).unwrap();
    let keys: Vec<(String, u64)> = rows.iter().map(|r| (r.method.clone(), r.seed)).collect();
    assert_eq!(
        keys,
        [("gravilon", 0), ("gravilon", 1), ("adagrad:0.01", 0), ("adagrad:0.01", 1)]
            .map(|(m, s)| (m.to_string(), s))
    );
    assert!(rows.iter().all(|r| r.steps_run == 12 && !r.failed));
    let manifest = std::fs::read_to_string(dir.path().join("r.manifest")).unwrap();
    assert!(manifest.contains("mode=fixed_steps"));
    assert!(manifest.contains("steps=12"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "# quick run\nmethods = adam\ntrials = 3\nsteps = 4\nsynthetic = true\nsynthetic-train = 300\nsynthetic-test = 50\n",
    )
    .unwrap();
    let out = gravilon(&["accuracy", "--config", "run.conf", "--trials", "1", "--out", "c.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(std::fs::read_to_string(dir.path().join("c.csv")).unwrap().as_bytes()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].method.as_str(), rows[0].steps_run), ("adam", 4));
}

#[test]
fn steps_mode_reports_target_or_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravilon(
        &[
            "steps", "--synthetic", "--synthetic-train", "400", "--synthetic-test", "100",
            "--methods", "gravilon", "--batch", "32", "--target", "0.9", "--cap", "300",
            "--eval-subset", "200", "--out", "s.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(std::fs::read_to_string(dir.path().join("s.csv")).unwrap().as_bytes()).unwrap();
    let r = &rows[0];
    match r.steps_to_target {
        Some(s) => assert_eq!(s, r.steps_run),
        None => assert_eq!(r.steps_run, 300),
    }
    assert!(std::fs::read_to_string(dir.path().join("s.manifest")).unwrap().contains("mode=steps_to_target"));
}

#[test]
fn testbed_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravilon(
        &["testbed", "--objective", "quadratic", "--x0", "1", "--max-steps", "3", "--out", "t.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,f,beta,x0");
    assert_eq!(lines[1], "0,1e0,2.5e-1,1e0");
    assert_eq!(lines[4], "3,1.5625e-2,,1.25e-1");

    let out = gravilon(&["testbed", "--objective", "affine", "--x0", "5", "--max-steps", "2"], dir.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().nth(2).unwrap(), "1,0e0,0e0,2e0");
}

#[test]
fn gradcheck_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravilon(&["gradcheck", "--seed", "3"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let err: f64 = text
        .split_whitespace()
        .find_map(|w| w.strip_prefix("max_rel_error="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err <= 1e-6, "{text}");
}
