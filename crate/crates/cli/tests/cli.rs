use std::path::Path;
use std::process::{Command, Output};

fn rcc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcc"))
        .args(args)
        .current_dir(dir)
        .env_remove("RCC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

const FOUR_POINTS: &str = "0,0\n0.3,0.1\n5,5\n5.2,4.9\n";

#[test]
fn cluster_lambda_zero_keeps_every_row_apart() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", FOUR_POINTS);
    let out = rcc(
        &[
            "cluster", "--input", "x.csv", "--lambda", "0", "--output", "r.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("k=4 "));
    let json = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert!(json.starts_with("{\"labels\":[0,1,2,3],\"k\":4,"));
}

#[test]
fn cluster_squared_loss_sentinel() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", FOUR_POINTS);
    let out = rcc(
        &[
            "cluster",
            "--input",
            "x.csv",
            "--lambda",
            "0.5",
            "--tau",
            "inf",
            "--weights",
            "uniform",
            "--output",
            "r.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("k=2 "), "{}", stdout(&out));
}

#[test]
fn cluster_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", FOUR_POINTS);
    for name in ["a.json", "b.json"] {
        let out = rcc(
            &[
                "cluster", "--input", "x.csv", "--lambda", "0.2", "--output", name,
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn malformed_csv_exits_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.csv", "1,2\n3\n");
    let out = rcc(
        &[
            "cluster", "--input", "bad.csv", "--lambda", "1", "--output", "r.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn non_convergence_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", FOUR_POINTS);
    let out = rcc(
        &[
            "cluster",
            "--input",
            "x.csv",
            "--lambda",
            "1",
            "--max-iter",
            "3",
            "--output",
            "r.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let json = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert!(json.contains("\"converged\":false"));
}

#[test]
fn bad_flags_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcc(&["cluster", "--lambda", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = rcc(&["nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    write(dir.path(), "x.csv", FOUR_POINTS);
    let out = rcc(
        &[
            "cluster",
            "--input",
            "x.csv",
            "--lambda",
            "1",
            "--weights",
            "cosine",
            "--output",
            "r.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_documents_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcc(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Exit codes:"));
    assert!(text.contains("2  the solver stopped at --max-iter"));
    let out = rcc(&["cluster", "--help"], dir.path());
    assert!(stdout(&out).contains("Exit codes:"));
}

#[test]
fn path_grid_zero_and_huge() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", FOUR_POINTS);
    let out = rcc(
        &[
            "path",
            "--input",
            "x.csv",
            "--lambda-grid",
            "0,1e4",
            "--target-k",
            "3",
            "--output",
            "p.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "lambda,k,objective,iterations,converged");
    assert!(rows[1].starts_with("0.0,4,"));
    assert!(rows[2].starts_with("10000.0,1,"));
    assert_eq!(stdout(&out).trim(), "no grid lambda gives k=3");
}

#[test]
fn path_requires_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", FOUR_POINTS);
    let out = rcc(&["path", "--input", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = rcc(
        &["path", "--input", "x.csv", "--lambda-grid", ""],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulated_two_cluster_data_reaches_k_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcc(
        &[
            "simulate",
            "--contam-frac",
            "0.06",
            "--seed",
            "7",
            "--output",
            "x.csv",
            "--labels",
            "truth.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let line = stdout(&out);
    let rows = line.trim().strip_prefix("contaminated rows: ").unwrap();
    assert_eq!(rows.split(',').count(), 3);

    let out = rcc(
        &[
            "path",
            "--input",
            "x.csv",
            "--lambda-log",
            "0.1:1000:20",
            "--target-k",
            "2",
            "--warm-start",
            "--output",
            "p.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    let lambda = report
        .trim()
        .strip_prefix("selected lambda=")
        .expect(&report)
        .split(' ')
        .next()
        .unwrap()
        .to_string();

    let out = rcc(
        &[
            "cluster", "--input", "x.csv", "--lambda", &lambda, "--output", "r.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("k=2 "));
}

#[test]
fn simulate_is_deterministic_and_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = rcc(
            &[
                "simulate", "--noise", "t2", "--seed", "11", "--output", name, "--labels", "l.csv",
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
    let out = rcc(
        &[
            "simulate", "--n", "51", "--output", "c.csv", "--labels", "l.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_prints_six_decimals() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.csv", "label\n0\n0\n0\n1\n1\n1\n");
    write(dir.path(), "b.csv", "label\n0\n0\n1\n1\n2\n2\n");
    let out = rcc(
        &["eval", "--labels-a", "a.csv", "--labels-b", "b.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0.242424\n");
    write(dir.path(), "c.csv", "1\n1\n2\n2\n");
    write(dir.path(), "d.csv", "2\n2\n1\n1\n");
    let out = rcc(
        &["eval", "--labels-a", "c.csv", "--labels-b", "d.csv"],
        dir.path(),
    );
    assert_eq!(stdout(&out), "1.000000\n");
}

#[test]
fn eval_length_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.csv", "0\n1\n");
    write(dir.path(), "b.csv", "0\n1\n1\n");
    let out = rcc(
        &["eval", "--labels-a", "a.csv", "--labels-b", "b.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn small_benchmark_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcc(
        &[
            "benchmark",
            "--reps",
            "2",
            "--n",
            "20",
            "--p",
            "4",
            "--seed",
            "5",
            "--table-only",
            "--output",
            "t.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "scenario,method,mean_ari,se_ari");
    assert_eq!(lines.len(), 1 + 5 * 3);
    assert!(lines[1].starts_with("outliers_0pct,huber_robust,"));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.csv", "0\n1\n");
    let out = Command::new(env!("CARGO_BIN_EXE_rcc"))
        .args(["eval", "--labels-a", "a.csv", "--labels-b", "a.csv"])
        .current_dir(dir.path())
        .env("RCC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_rcc"))
        .args(["eval", "--labels-a", "a.csv", "--labels-b", "a.csv"])
        .current_dir(dir.path())
        .env("RCC_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
