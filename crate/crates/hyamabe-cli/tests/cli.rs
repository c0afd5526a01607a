//! End-to-end checks of the command-line interface: argument validation,
//! exit codes, output files, and run-to-run determinism.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    run_in(args, Path::new("."))
}

fn run_in(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hyamabe"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should run");
    (
        out.status.code().expect("no exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn constants_reports_derived_values() {
    let (code, stdout, _) = run(&["constants", "--n", "2", "--m", "3"]);
    assert_eq!(code, 0);
    for needle in ["= 7/3", "= 16/3", "= 10/3", "78.996862", "Q(0)", "78.18644"] {
        assert!(stdout.contains(needle), "missing {needle:?} in:\n{stdout}");
    }
}

#[test]
fn constants_rejects_small_dimensions() {
    let (code, _, stderr) = run(&["constants", "--n", "1", "--m", "3"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("at least 2"), "stderr: {stderr}");
}

#[test]
fn solve_requires_exactly_one_radius_parameter() {
    let (code, _, stderr) = run(&["solve", "--n", "2", "--m", "2"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("exactly one of --r or --s"));

    let (code, _, _) = run(&["solve", "--n", "2", "--m", "2", "--r", "0.5", "--s", "1"]);
    assert_eq!(code, 2);

    let (code, _, stderr) = run(&["solve", "--n", "2", "--m", "2", "--r", "1.5"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("(0, 1]"), "stderr: {stderr}");
}

#[test]
fn solve_single_alpha_logs_events_and_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&[
        "solve",
        "--n",
        "2",
        "--m",
        "3",
        "--s",
        "-0.5",
        "--alpha",
        "3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("crossed zero"), "stdout: {stdout}");
    let csv = std::fs::read_to_string(dir.path().join("profile_alpha_3.csv")).unwrap();
    assert!(csv.starts_with("t,phi,dphi,energy\n"));
    assert!(csv.lines().count() > 10);
}

#[test]
fn solve_ground_state_mode_reports_bracket() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&[
        "solve",
        "--n",
        "2",
        "--m",
        "2",
        "--r",
        "1",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("alpha_lambda = 1.4142135"), "stdout: {stdout}");
    assert!(stdout.contains("bisections"));
    assert!(dir.path().join("ground_state.csv").exists());
}

#[test]
fn q_json_is_deterministic_and_well_formed() {
    let args = ["q", "--n", "2", "--m", "2", "--r", "1"];
    let (code, first, _) = run(&args);
    assert_eq!(code, 0);
    let (_, second, _) = run(&args);
    assert_eq!(first, second, "reruns should be byte-identical");

    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["schema"], 1);
    let q = v["q_value"].as_f64().unwrap();
    assert!((q - 61.56239).abs() < 1e-3, "q_value = {q}");
    assert!(v["norms"]["truncation_t"].as_f64().unwrap() < 50.0);
    assert!(v["q_rel_uncertainty"].as_f64().unwrap() < 1e-6);

    // --out writes the same document to a file.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    let (code, stdout, _) = run(&[
        "q",
        "--n",
        "2",
        "--m",
        "2",
        "--r",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(stdout.starts_with(written.trim_end()));
}

#[test]
fn sweep_is_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for jobs in ["1", "3"] {
        let name = format!("sweep_{jobs}.csv");
        let (code, _, _) = run_in(
            &[
                "sweep",
                "--n",
                "2",
                "--m",
                "2",
                "--r-min",
                "0.2",
                "--r-max",
                "1",
                "--steps",
                "5",
                "--jobs",
                jobs,
                "--out",
                &name,
                "--svg",
                &format!("chart_{jobs}.svg"),
            ],
            dir.path(),
        );
        assert_eq!(code, 0);
        outputs.push(std::fs::read(dir.path().join(&name)).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "CSV differs across job counts");

    let svg1 = std::fs::read(dir.path().join("chart_1.svg")).unwrap();
    let svg3 = std::fs::read(dir.path().join("chart_3.svg")).unwrap();
    assert_eq!(svg1, svg3);
    assert!(svg1.starts_with(b"<svg"));

    let csv = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(csv.starts_with("r,q_value,q_rel_uncertainty\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn sweep_rejects_degenerate_grid() {
    let (code, _, stderr) = run(&[
        "sweep", "--n", "2", "--m", "2", "--r-min", "0.3", "--r-max", "1", "--steps", "1",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("r-min = r-max"), "stderr: {stderr}");
}

#[test]
fn certify_trivial_target_short_circuits() {
    // mu = 0.5 puts the descent threshold above 1, so the small-r bound
    // already covers all of (0, 1] and no solves are needed.
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run_in(&["certify", "--n", "2", "--m", "3", "--mu", "0.5"], dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("certified"), "stdout: {stdout}");
    assert!(stdout.contains("0 steps"));
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certify_trace.json")).unwrap())
            .unwrap();
    assert_eq!(trace["verdict"], "certified");
    assert_eq!(trace["steps"].as_array().unwrap().len(), 0);
    assert!(dir.path().join("certify_report.md").exists());
}

#[test]
fn certify_unreachable_target_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run_in(
        &["certify", "--n", "2", "--m", "2", "--mu", "0.99", "--q0", "1000"],
        dir.path(),
    );
    assert_eq!(code, 1);
    assert!(stdout.contains("not certified"), "stdout: {stdout}");
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certify_trace.json")).unwrap())
            .unwrap();
    assert_eq!(trace["verdict"], "failed");
    assert_eq!(trace["failed_step"], 1);
}

#[test]
fn certify_without_stored_constant_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run_in(&["certify", "--n", "2", "--m", "4"], dir.path());
    assert_eq!(code, 3);
    assert!(stderr.contains("flat-limit"), "stderr: {stderr}");
}
