use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn taskalloc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taskalloc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = taskalloc(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

/// CSV text with the wall-time column dropped.
fn untimed(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|&h| h == "wall_time_ms").unwrap();
    text.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(col);
            f.join(",")
        })
        .collect()
}

fn small_problem(dir: &Path, seed: &str) -> String {
    ok(
        &[
            "gen", "problem", "--seed", seed, "--robots", "4", "--tasks", "5", "--traits", "2",
        ],
        dir,
    );
    dir.join("problem.json").to_str().unwrap().to_owned()
}

#[test]
fn gen_is_byte_identical_per_seed() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    small_problem(a.path(), "3");
    small_problem(b.path(), "3");
    small_problem(c.path(), "4");
    let read = |d: &Path| fs::read(d.join("problem.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn scenario_runs_are_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let problem = small_problem(dir.path(), "8");
    ok(
        &[
            "gen",
            "scenario",
            &problem,
            "--kind",
            "mixed_sequence",
            "--seed",
            "2",
        ],
        dir.path(),
    );
    let scenario = dir.path().join("scenario.json");
    let scenario = scenario.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = [
        "run-scenario",
        &problem,
        scenario,
        "--repetitions",
        "1",
        "--seed",
        "1",
    ];
    ok(&args, &a);
    ok(&args, &b);
    let rows = untimed(&a.join("results.csv"));
    assert_eq!(rows, untimed(&b.join("results.csv")));
    // initial solve plus three events, in both modes
    assert_eq!(rows.len(), 1 + 2 * 4);
    assert!(a.join("results.json").exists() && a.join("summary.txt").exists());
}

#[test]
fn solve_writes_a_solution() {
    let dir = tempfile::tempdir().unwrap();
    let problem = small_problem(dir.path(), "5");
    let o = ok(
        &[
            "solve",
            &problem,
            "--alpha",
            "0.3",
            "--prm-samples",
            "150",
            "--prm-k",
            "6",
        ],
        dir.path(),
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("makespan"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solution.json")).unwrap())
            .unwrap();
    assert!(json["makespan"].as_f64().unwrap() > 0.0);
    assert_eq!(json["coalitions"].as_object().unwrap().len(), 5);
}

#[test]
fn bounds_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = [
        "bounds",
        "--count",
        "2",
        "--robots",
        "2",
        "--tasks",
        "3",
        "--alphas",
        "0,0.2,0.4",
    ];
    ok(&args, &a);
    ok(&args, &b);
    let csv = fs::read_to_string(a.join("bounds.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(b.join("bounds.csv")).unwrap());
    assert!(csv.starts_with(
        "alpha,optimal,achieved,lb,ub,bound_eq6,bound_eq14,min_open_apr,gap_normalized\n"
    ));
    assert_eq!(csv.lines().count(), 1 + 6);
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let o = taskalloc(&["bounds", "--count", "1", "--alphas", "0.5"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("significance"));

    let o = taskalloc(&["bounds", "--robots", "4", "--tasks", "4"], dir.path());
    assert!(!o.status.success());

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"robots": [], "traits": [], "tasks": [], "world": {"bounds": [0,0,1,1]}, "extra": 1}"#,
    )
    .unwrap();
    let o = taskalloc(&["solve", bad.to_str().unwrap()], dir.path());
    assert!(!o.status.success());

    let o = taskalloc(&["solve", "/nonexistent/problem.json"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn exhausted_search_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let problem = small_problem(dir.path(), "6");
    let o = taskalloc(&["solve", &problem, "--max-expansions", "0"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no solution"));
}
