//! The command-line front end, driven through `run_command` and the binary.

use fsard_aoi::analytic::{average_aoi, AnalyticReport};
use fsard_aoi::cli::{run_command, Comparison, RunOutcome};
use fsard_aoi::output::{parse_records, Format};
use fsard_aoi::sim::SimStats;
use fsard_aoi::sweep::SweepResult;
use fsard_aoi::SystemConfig;

fn run(args: &str) -> RunOutcome {
    run_command(std::iter::once("fsard").chain(args.split_whitespace()))
}

fn ok(args: &str) -> Vec<u8> {
    let out = run(args);
    assert_eq!(out.code, 0, "{args}: {}", out.stderr);
    out.stdout
}

#[test]
fn analyze_reports_the_closed_form() {
    let bytes = ok("analyze --users 30 --frame 5 --minislots 4 --rho 0.02 --gamma 0.3");
    let report: AnalyticReport = parse_records(&bytes, Format::Json).unwrap();
    let expected = average_aoi(&SystemConfig::new(30, 5, 4, 0.02, 0.3).unwrap()).unwrap();
    assert_eq!(report, expected);

    let csv = ok("analyze --users 30 --frame 5 --minislots 4 --rho 0.02 --gamma 0.3 --format csv");
    assert_eq!(
        parse_records::<AnalyticReport>(&csv, Format::Csv).unwrap(),
        expected
    );
}

#[test]
fn simulate_aloha_hand_case() {
    let bytes = ok("simulate --protocol aloha --users 1 --rho 1 --tau 1 --frames 100000 --seed 7");
    let stats: SimStats = parse_records(&bytes, Format::Json).unwrap();
    assert!((stats.mean_aoi - 1.0).abs() <= 0.01);
}

#[test]
fn validation_errors_exit_with_two() {
    let out = run("analyze --users 30 --frame 5 --minislots 4 --rho 1.5 --gamma 0.3");
    assert_eq!(out.code, 2);
    assert!(
        out.stderr.contains("`rho`") && out.stderr.contains("(0,1]"),
        "{}",
        out.stderr
    );

    for (args, flag) in [
        (
            "analyze --users 30 --frame 1 --minislots 4 --rho 0.5 --gamma 0.3",
            "frame",
        ),
        (
            "analyze --users 0 --frame 3 --minislots 4 --rho 0.5 --gamma 0.3",
            "users",
        ),
        (
            "simulate --users 3 --frame 3 --minislots 2 --rho 0.5 --gamma 0.3 --frames 0",
            "frames",
        ),
        (
            "sweep --users 3 --minislots 2 --rho 0.5 --gamma-grid 0.5,1.5",
            "gamma",
        ),
        (
            "simulate --protocol aloha --users 3 --rho 0.5 --tau 0",
            "tau",
        ),
        (
            "simulate --protocol aloha --users 3 --rho 0.5 --tau 0.5 --trace /tmp/x.csv",
            "trace",
        ),
        (
            "analyze --users 3 --frame 3 --minislots 2 --rho 0.5 --gamma x",
            "--gamma",
        ),
        (
            "analyze --users 3 --frame 3 --minislots 2 --rho 0.5",
            "--gamma",
        ),
        ("frobnicate", "frobnicate"),
    ] {
        let out = run(args);
        assert_eq!(out.code, 2, "{args}");
        assert!(out.stderr.contains(flag), "{args}: {}", out.stderr);
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn runtime_errors_exit_with_one() {
    let out = run("analyze --users 2 --frame 3 --minislots 1 --rho 1 --gamma 1");
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("degenerate"));

    let out = run("analyze --users 2 --frame 3 --minislots 2 --rho 1 --gamma 1 --output /nonexistent/dir/out.json");
    assert_eq!(out.code, 1);
    assert!(
        out.stderr.contains("/nonexistent/dir/out.json"),
        "{}",
        out.stderr
    );
}

#[test]
fn identical_arguments_give_identical_bytes() {
    let args = "simulate --users 6 --frame 3 --minislots 2 --rho 0.2 --gamma 0.7 --frames 20000 --warmup 100 --replications 3 --format csv";
    assert_eq!(ok(args), ok(args));
    assert_eq!(ok(args), ok(&format!("{args} --threads 1")));
    let aloha =
        "sweep --protocol aloha --users 5 --rho 0.1 --tau-grid 0.1:0.5:0.1 --frames 20000 --seed 3";
    assert_eq!(ok(aloha), ok(aloha));
    assert_ne!(ok(aloha), ok(&format!("{aloha} --seed 4")));
}

#[test]
fn sweep_flags_the_minimum() {
    let bytes = ok("sweep --users 30 --minislots 4 --rho 0.01 --frame-min 2 --frame-max 4 --gamma-grid 0.5,1 --format csv");
    let text = String::from_utf8(bytes.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param1,param2,aaoi,ci,source,best,error");
    assert_eq!(lines.len(), 7);
    let result: SweepResult = parse_records(&bytes, Format::Csv).unwrap();
    let best = result.best_point().unwrap();
    assert!((best.aaoi.unwrap() - 131.16).abs() / 131.16 < 0.02);
    assert_eq!(
        lines.iter().filter(|l| l.contains(",analytic,1,")).count(),
        1
    );
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(
        &path,
        "# hand case\nusers = 1\nframe = 2\nminislots = 1\nrho = 1\ngamma = 0.5\n",
    )
    .unwrap();
    let conf = path.display();

    let from_file: AnalyticReport =
        parse_records(&ok(&format!("analyze --config {conf}")), Format::Json).unwrap();
    let overridden: AnalyticReport = parse_records(
        &ok(&format!("analyze --config {conf} --gamma 1")),
        Format::Json,
    )
    .unwrap();
    assert!((overridden.aaoi - 3.5).abs() < 1e-12);
    assert!(from_file.aaoi > overridden.aaoi);

    std::fs::write(&path, "users = 1\nwidth = 3\n").unwrap();
    let out = run(&format!("analyze --config {conf}"));
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("--width"), "{}", out.stderr);
}

#[test]
fn output_file_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("stats.csv");
    let trace_path = dir.path().join("trace.csv");
    let out = run(&format!(
        "simulate --users 3 --frame 3 --minislots 2 --rho 0.4 --gamma 0.8 --frames 200 --warmup 10 --format csv --output {} --trace {}",
        out_path.display(),
        trace_path.display()
    ));
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.is_empty());
    let stats: SimStats = parse_records(&std::fs::read(&out_path).unwrap(), Format::Csv).unwrap();
    assert_eq!(stats.horizon_frames, 200);
    let trace = std::fs::read_to_string(&trace_path).unwrap();
    assert!(trace.starts_with("slot,user,aoi,event\n"));
    assert!(trace.lines().count() > 3 * 3 * 210);

    let refused = run("simulate --users 50 --frame 10 --minislots 2 --rho 0.4 --gamma 0.8 --frames 100000 --trace /tmp/never.csv");
    assert_eq!(refused.code, 2);
}

#[test]
fn compare_pairs_closed_form_and_simulation() {
    let bytes = ok("compare --users 2 --frame 3 --minislots 2 --rho 0.3 --gamma 0.6 --frames 200000 --replications 4 --format csv");
    let c: Comparison = parse_records(&bytes, Format::Csv).unwrap();
    assert!(c.rel_dev.abs() < 0.01);
    assert!(((c.simulated_aaoi - c.analytic_aaoi) / c.analytic_aaoi - c.rel_dev).abs() < 1e-15);
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_fsard");
    let good = std::process::Command::new(bin)
        .args([
            "analyze",
            "--users",
            "1",
            "--frame",
            "3",
            "--minislots",
            "1",
            "--rho",
            "1",
            "--gamma",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(good.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&good.stdout).unwrap();
    assert_eq!(json["aaoi"], 4.0);

    let bad = std::process::Command::new(bin)
        .args(["analyze", "--rho", "1.5"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
