use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use girthcut_core::schedule::{save_schedule, PaperParams, Schedule};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn girthcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_girthcut"))
        .args(args)
        .env_remove("GIRTHCUT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_schedule(dir: &Path, name: &str, s: &Schedule) -> String {
    let path = dir.join(name);
    std::fs::write(&path, save_schedule(s)).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_schedule() -> Schedule {
    PaperParams {
        p0: "1/4".parse().unwrap(),
        p_red: "1/2".parse().unwrap(),
        p_mixed: 0.into(),
        ..PaperParams::paper_defaults()
    }
    .with_phases(1, 1)
    .build()
}

#[test]
fn missing_schedule_is_a_usage_error_naming_the_file() {
    let o = girthcut(&["solve", "--schedule", "no/such/missing.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.cfg"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_two() {
    let fast = fixture("fast.cfg");
    let fast = fast.to_str().unwrap();
    for args in [
        vec!["oracle", "--schedule", fast, "--k", "3"],
        vec!["simulate", "--schedule", fast, "--n", "101"],
        vec![
            "simulate",
            "--schedule",
            fast,
            "--n",
            "100",
            "--policy",
            "random",
        ],
        vec!["sweep", "--pr", ","],
        vec![
            "sweep",
            "--pr",
            "2^-10,2^-11,2^-12",
            "--prb",
            "2^-16,2^-17,2^-18",
            "--max-runs",
            "4",
        ],
        vec!["solve", "--paper-defaults", "--precision", "8"],
        vec!["solve"],
    ] {
        let o = girthcut(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_girthcut"))
        .args(["solve", "--paper-defaults"])
        .env("GIRTHCUT_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_passes_on_fixture_and_is_exact_on_inert() {
    let dir = tempfile::tempdir().unwrap();
    let small = write_schedule(dir.path(), "small.cfg", &small_schedule());
    let o = girthcut(&["oracle", "--schedule", &small, "--k", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS at k = 2"), "{}", stdout(&o));

    let inert = write_schedule(dir.path(), "inert.cfg", &Schedule::inert(2));
    let o = girthcut(&["oracle", "--schedule", &inert, "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("max deviation 0.000e0"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn one_point_sweep_matches_solve() {
    let fast = fixture("fast.cfg");
    let fast = fast.to_str().unwrap();
    let solved = girthcut(&["solve", "--schedule", fast, "--precision", "64", "--json"]);
    assert!(solved.status.success());
    let report: Value = serde_json::from_str(&stdout(&solved)).unwrap();
    let swept = girthcut(&["sweep", "--schedule", fast, "--precision", "64"]);
    assert!(swept.status.success());
    let text = stdout(&swept);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols[4..6], ["315", "2135"]);
    assert_eq!(cols[6], report["final"]["p"]["value"].as_str().unwrap());
    assert_eq!(cols[8], report["final"]["r"]["value"].as_str().unwrap());
}

#[test]
fn sweep_rows_are_sorted_by_p() {
    let o = girthcut(&[
        "sweep",
        "--schedule",
        fixture("fast.cfg").to_str().unwrap(),
        "--pr",
        "2^-4,2^-5,2^-6",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ps: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ps.len(), 3);
    assert!(ps.windows(2).all(|w| w[0] >= w[1]), "{ps:?}");
}

#[test]
fn calibrate_edge_cases() {
    let fast = fixture("fast.cfg");
    let fast = fast.to_str().unwrap();
    let o = girthcut(&[
        "calibrate",
        "--schedule",
        fast,
        "--theta1",
        "1",
        "--theta2",
        "1e-5",
        "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for r in v["readings"].as_array().unwrap() {
        assert_eq!(r["phase1_rounds"], 1);
    }
    let o = girthcut(&[
        "calibrate",
        "--schedule",
        fast,
        "--theta",
        "1e-30",
        "--k-max",
        "50",
    ]);
    assert!(!o.status.success());
}

#[test]
fn simulate_writes_one_row_per_sample_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let fast = fixture("fast.cfg");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = girthcut(&[
            "simulate",
            "--schedule",
            fast.to_str().unwrap(),
            "--n",
            "2000",
            "--samples",
            "5",
            "--seed",
            "1",
            "--girth-report",
            "6",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (std::fs::read(out).unwrap(), stdout(&o))
    };
    let (a, summary) = run("a.csv");
    let (b, _) = run("b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(summary.contains("5 samples, n = 2000"));
    assert!(summary.contains("short cycles"));
}

#[test]
fn solve_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let fast = fixture("fast.cfg");
    let run = |tag: &str| {
        let traj = dir.path().join(format!("{tag}.csv"));
        let o = girthcut(&[
            "solve",
            "--schedule",
            fast.to_str().unwrap(),
            "--precision",
            "128",
            "--trajectory",
            traj.to_str().unwrap(),
            "--every",
            "100",
            "--json",
        ]);
        assert!(o.status.success());
        (o.stdout, std::fs::read(traj).unwrap())
    };
    let (r1, t1) = run("one");
    let (r2, t2) = run("two");
    assert_eq!(r1, r2);
    assert_eq!(t1, t2);
    // header plus rounds 1, 100, ..., 2400 and the final round
    assert_eq!(
        String::from_utf8(t1).unwrap().lines().count(),
        1 + 1 + 24 + 1
    );
}

#[test]
fn solve_text_report_lists_bounds() {
    let o = girthcut(&[
        "solve",
        "--schedule",
        fixture("fast.cfg").to_str().unwrap(),
        "--precision",
        "96",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    for key in [
        "p_K",
        "r_K",
        "b_K",
        "w_K",
        "cut per vertex",
        "frac cover",
        "required girth",
    ] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
}
