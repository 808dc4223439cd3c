use std::path::Path;
use std::process::{Command, Output};

fn stfd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stfd")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = stfd(args);
    assert!(out.status.success(), "stfd {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn single_thread_output_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let common = ["--study", "precond_bench", "--problem", "annulus", "--degrees", "1,2", "--nels", "4,8"];
    run_ok(&[&common[..], &["--single-thread", "--out", a.to_str().unwrap()]].concat());
    run_ok(&[&common[..], &["--single-thread", "--out", b.to_str().unwrap()]].concat());
    run_ok(&[&common[..], &["--parallel", "--out", c.to_str().unwrap()]].concat());
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
}

#[test]
fn every_row_has_a_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    run_ok(&[
        "--study",
        "precond_bench",
        "--problem",
        "square_varcoef",
        "--degrees",
        "1",
        "--nels",
        "4,16",
        "--max-dofs",
        "1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (header, rows) = read_csv(&out);
    let s = header.iter().position(|h| h == "status").unwrap();
    let statuses: Vec<&str> = rows.iter().map(|r| r[s].as_str()).collect();
    assert_eq!(statuses, ["ok", "skipped_memory"]);
}

#[test]
fn convergence_study_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    run_ok(&["--study", "convergence", "--degrees", "1", "--nels", "4,8,16", "--out", out.to_str().unwrap()]);
    let (header, rows) = read_csv(&out);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert!(rows[0][col("order_l2l2")].is_empty());
    let order: f64 = rows[2][col("order_l2l2")].parse().unwrap();
    assert!((order - 2.0).abs() < 0.2, "L2 order {order}");
    let order_x: f64 = rows[2][col("order_x_upper")].parse().unwrap();
    assert!((order_x - 1.0).abs() < 0.2, "X order {order_x}");
}

#[test]
fn manifest_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    run_ok(&["--study", "cond_time_stable", "--degrees", "2", "--nels", "16", "--out", out.to_str().unwrap()]);
    let m: serde_json::Value =
        serde_json::from_reader(std::fs::File::open(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(m["config"]["study"], "cond_time_stable");
    assert_eq!(m["config"]["tol"], 1e-8);
    assert_eq!(m["status_counts"]["ok"], 1);
    assert!(m["versions"]["stfd_core"].is_string());
    let (_, rows) = read_csv(&out);
    let kappa: f64 = rows[0][3].parse().unwrap();
    assert!(kappa > 2.5 && kappa < 4.0);
}

#[test]
fn config_file_with_command_line_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    let out = dir.path().join("from_file.csv");
    std::fs::write(
        &cfg,
        format!("# space conditioning\nstudy = cond_space\ndegrees = 2..3\nnels = 16\nout = {}\n", out.display()),
    )
    .unwrap();
    run_ok(&["--config", cfg.to_str().unwrap(), "--degrees", "5"]);
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "5");
}

#[test]
fn invalid_arguments_fail_cleanly() {
    let bad = [
        vec!["--study", "convergence", "--tol", "-1"],
        vec!["--study", "precond_bench", "--precond", "jacobi"],
        vec!["--study", "convergence", "--problem", "nowhere"],
        vec!["--degrees", "2"],
    ];
    for args in bad {
        let out = stfd(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
}
