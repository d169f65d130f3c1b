use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circlepack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_two_circles_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("two.txt");
    let svg = dir.path().join("two.svg");
    let out = run(&["solve", "--n", "2", "--radius", "2", "--seed", "1", "--out", p(&file), "--svg", p(&svg)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("Feasible"));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<?xml"));

    let verify = run(&["verify", p(&file)]);
    assert_eq!(code(&verify), 0);
    assert!(stdout(&verify).starts_with("PASS"));
}

#[test]
fn solve_reports_timeout_with_exit_2() {
    let out = run(&["solve", "--n", "8", "--radius", "3", "--t0", "0.3"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("Timeout"));
    let out = run(&["solve", "--n", "8", "--radius", "3", "--max-restarts", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("Stuck"));
}

#[test]
fn solve_with_best_known_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    std::fs::write(&table, "n,radius\n3,2.3\n4,2.5\n").unwrap();
    let out = run(&["solve", "--n", "4", "--best-known", p(&table), "--max-restarts", "5"]);
    assert_eq!(code(&out), 0);
    let missing = run(&["solve", "--n", "9", "--best-known", p(&table)]);
    assert_eq!(code(&missing), 64);
    std::fs::write(&table, "n,radius\n3,abc\n").unwrap();
    assert_eq!(code(&run(&["solve", "--n", "3", "--best-known", p(&table)])), 65);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["solve", "--radius", "2"])), 64);
    assert_eq!(code(&run(&["solve", "--n", "2", "--radius", "0.5"])), 64);
    assert_eq!(code(&run(&["solve", "--n", "2", "--radius", "2", "--l", "0"])), 64);
    assert_eq!(code(&run(&["solve", "--n", "2", "--radius", "2", "--t0", "-1"])), 64);
    assert_eq!(code(&run(&["solve", "--n", "2", "--radius", "2", "--mode", "fast"])), 64);
    assert_eq!(code(&run(&["bench", "--n", "2", "--reps", "0"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn verify_flags_a_nudged_circle() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("l.txt");
    std::fs::write(
        &file,
        "# circlepack layout\nn=2\nradius=3\nenergy=0\nfeasible=true\n-1.5 0\n0.49 0\n",
    )
    .unwrap();
    let out = run(&["verify", p(&file)]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.starts_with("FAIL"));
    assert_eq!(text.lines().filter(|l| l.contains("pair:")).count(), 1, "{text}");
    assert!(!text.contains("container:"));
}

#[test]
fn malformed_or_missing_files_exit_65() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "n=2\nradius=2\nenergy=0\nfeasible=true\n0 0\n").unwrap();
    assert_eq!(code(&run(&["verify", p(&file)])), 65);
    std::fs::write(&file, "n=1\nradius=2\nenergy=0\nfeasible=true\n0 zero\n").unwrap();
    let out = run(&["verify", p(&file)]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    assert_eq!(code(&run(&["verify", p(&dir.path().join("nope"))])), 65);
    assert_eq!(code(&run(&["render", p(&dir.path().join("nope")), "--svg", p(&dir.path().join("x.svg"))])), 65);
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("l.txt");
    let svg = dir.path().join("l.svg");
    std::fs::write(&file, "n=2\nradius=2\nenergy=0\nfeasible=true\n-1 0\n1 0\n").unwrap();
    assert_eq!(code(&run(&["render", p(&file), "--svg", p(&svg), "--indices"])), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle ").count(), 3);
    assert_eq!(text.matches("<text ").count(), 2);
}

#[test]
fn improve_small_instances() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.txt");
    let out = run(&["improve", "--n", "1", "--radius", "5", "--out", p(&file)]);
    assert_eq!(code(&out), 0);
    let doc = std::fs::read_to_string(&file).unwrap();
    assert!(doc.contains("\nradius=1.000000000000\n"), "{doc}");

    let table = dir.path().join("t.csv");
    std::fs::write(&table, "n,radius\n3,2.5\n").unwrap();
    let file = dir.path().join("three.txt");
    let out = run(&["improve", "--n", "3", "--best-known", p(&table), "--t1", "60", "--out", p(&file)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("R0 - R*:"));
    let r: f64 = std::fs::read_to_string(&file)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix("radius="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((r - (1.0 + 2.0 / 3f64.sqrt())).abs() < 1e-6, "{r}");
}

#[test]
fn bench_csv_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let out = run(&["bench", "--n", "2-4", "--reps", "2", "--max-restarts", "3", "--out", p(&csv)]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,target_radius,hits,attempts,mean_time_s"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!((r[2], r[3]), ("2", "2"));
    }

    let speed = run(&["bench", "--experiment", "speedup", "--n", "20", "--reps", "2"]);
    assert_eq!(code(&speed), 0);
    assert!(stdout(&speed).contains("speedup"));
}

#[test]
fn fixed_seed_iteration_budget_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for f in [&a, &b] {
        let out = run(&["solve", "--n", "15", "--radius", "4.6", "--seed", "9", "--max-restarts", "2", "--out", p(f)]);
        assert!(matches!(code(&out), 0 | 2));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
