use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kepfair::instance::example_pool;
use kepfair::metrics::SchemeReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kepfair"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn example(dir: &Path) -> PathBuf {
    let path = dir.join("example.kep");
    fs::write(&path, example_pool().to_native()).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_rawls_single_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example(dir.path());
    let out = dir.path().join("out");
    let o = run(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--concept",
        "rawls",
        "--kind",
        "single",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = SchemeReport::parse(&fs::read_to_string(out.join("example_rawls_single.txt")).unwrap()).unwrap();
    assert!((report.f2.unwrap() - 0.5).abs() < 1e-6);
    assert!((report.master_y2.unwrap() - 0.5).abs() < 1e-6);
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("example,6,"));
}

#[test]
fn utilitarian_pof_is_zero_on_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "solve",
        "--generate",
        "12,0.1,0.3",
        "--seed",
        "4",
        "--concept",
        "utilitarian",
        "--kind",
        "single",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = SchemeReport::parse(&fs::read_to_string(out.join("gen-12-0.1-0.3-4_utilitarian_single.txt")).unwrap()).unwrap();
    assert_eq!(report.pof, Some(0.0));
}

#[test]
fn oracle_check_records_gap() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example(dir.path());
    let out = dir.path().join("out");
    let o = run(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--concept",
        "nash",
        "--kind",
        "nswp",
        "--oracle-check",
        "--export-conic",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = SchemeReport::parse(&fs::read_to_string(out.join("example_nash_nswp.txt")).unwrap()).unwrap();
    assert!(report.oracle_gap.unwrap() <= 1e-6);
    let cbf = fs::read_to_string(out.join("example_nash_nswp.cbf")).unwrap();
    assert!(cbf.starts_with("VER\n3\n"));
    assert!(kepfair::conic::import_problem(&cbf).is_ok());
}

#[test]
fn oracle_prints_one_gap_line_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example(dir.path());
    let o = run(&["oracle", "--instance", inst.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("gap ")).collect();
    assert_eq!(lines.len(), 13);
    for l in lines {
        let g: f64 = l.rsplit("gap = ").next().unwrap().parse().unwrap();
        assert!(g <= 1e-6, "{l}");
    }
}

#[test]
fn oracle_on_arcless_instance_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.kep");
    fs::write(&path, "kep 2 1 0\npair a 10\npair b 90\nndd n\n").unwrap();
    let o = run(&["oracle", "--instance", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_rejects_dense_instance() {
    let o = run(&["oracle", "--generate", "20,0,0.9", "--seed", "1", "--concept", "rawls", "--kind", "single"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeded the limit"));
}

#[test]
fn generate_is_deterministic() {
    let a = run(&["generate", "-n", "16", "--ndd", "0.1", "--seed", "3"]);
    let b = run(&["generate", "-n", "16", "--ndd", "0.1", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let inst = kepfair::parse_instance(&stdout(&a)).unwrap();
    assert_eq!(inst.n_pairs(), 16);
    let c = run(&["generate", "-n", "16", "--ndd", "0.1", "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generate_rejects_bad_parameters() {
    assert!(!run(&["generate", "-n", "16", "--ndd", "1.5"]).status.success());
    assert!(!run(&["generate", "-n", "0"]).status.success());
}

#[test]
fn sample_draws_from_the_support() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example(dir.path());
    let out = dir.path().join("out");
    let o = run(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--concept",
        "rawls",
        "--kind",
        "single",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let report_path = out.join("example_rawls_single.txt");
    let report = SchemeReport::parse(&fs::read_to_string(&report_path).unwrap()).unwrap();

    let one = run(&["sample", "--report", report_path.to_str().unwrap(), "--seed", "1", "--draws", "1"]);
    assert!(one.status.success());
    let text = stdout(&one);
    assert_eq!(text.lines().count(), 1);
    assert!(report.support.iter().any(|(_, l)| l == text.trim()));

    let many = run(&["sample", "--report", report_path.to_str().unwrap(), "--seed", "7", "--draws", "100000"]);
    let text = stdout(&many);
    let with_v4 = text.lines().filter(|l| l.contains("v4")).count() as f64 / 1e5;
    assert!((with_v4 - 0.5).abs() <= 0.01, "{with_v4}");
    let again = run(&["sample", "--report", report_path.to_str().unwrap(), "--seed", "7", "--draws", "100000"]);
    assert_eq!(many.stdout, again.stdout);
}

#[test]
fn solve_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example(dir.path());
    let mut texts = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let o = run(&["solve", "--instance", inst.to_str().unwrap(), "--concept", "if", "--kind", "nswp", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        let text = fs::read_to_string(out.join("example_if_nswp.txt")).unwrap();
        texts.push(
            text.lines()
                .filter(|l| !l.starts_with("seconds"))
                .collect::<Vec<_>>()
                .join("\n"),
        );
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn missing_instance_is_an_error() {
    let o = run(&["solve", "--concept", "rawls"]);
    assert!(!o.status.success());
    let o = run(&["solve", "--instance", "/nonexistent/x.kep"]);
    assert!(!o.status.success());
}
