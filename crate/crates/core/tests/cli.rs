use std::fs;
use std::path::Path;

use dvml::cli;
use dvml::reporting::{read_report_json, REPORT_SCHEMA};
use proptest::prelude::*;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("dvml").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn close_examples() {
    let (code, out, _) = run(&[
        "close",
        "--dut",
        "comparator",
        "--width",
        "2",
        "--method",
        "ann",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("test iterations: "));
    assert!(out.contains("total iterations: "));

    let (code, out, _) = run(&[
        "close",
        "--dut",
        "comparator",
        "--width",
        "5",
        "--method",
        "random",
        "--seed",
        "7",
        "--cap",
        "100",
    ]);
    assert_eq!(code, 2);
    assert!(out.contains("NOT-CONVERGED"));

    let (code, out, err) = run(&[
        "close",
        "--dut",
        "comparator",
        "--width",
        "0",
        "--method",
        "random",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    assert!(err.contains("width"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"dut": "comparator", "width": 1, "method": "random", "seed": 3, "cap": 1}"#,
    )
    .unwrap();
    let c = path_str(&cfg);
    assert_eq!(run(&["close", "--config", c]).0, 2);
    assert_eq!(run(&["close", "--config", c, "--cap", "1000"]).0, 0);
    assert_eq!(run(&["close", "--config", c, "--cap", "1000", "--width", "0"]).0, 3);

    fs::write(
        &cfg,
        r#"{"dut": "comparator", "width": 0, "method": "random", "seed": 3}"#,
    )
    .unwrap();
    assert_eq!(run(&["close", "--config", c]).0, 3);
    assert_eq!(run(&["close", "--config", c, "--width", "2"]).0, 0);

    fs::write(&cfg, r#"{"dut": "comparator", "width": 2, "colour": "red"}"#).unwrap();
    let (code, _, err) = run(&["close", "--config", c, "--method", "random", "--seed", "1"]);
    assert_eq!(code, 3);
    assert!(err.contains("colour"));

    assert_eq!(run(&["close", "--config", "/nonexistent/c.json"]).0, 3);
}

#[test]
fn config_constraints_and_model_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let log = dir.path().join("run.csv");
    fs::write(
        &cfg,
        r#"{
            "dut": "comparator", "width": 3, "method": "random", "seed": 2,
            "coverage_model": {
                "coverpoints": [{"name": "a", "port": "a", "bins": [{"range": [0, 3]}]}]
            },
            "constraints": {"a": {"range": [0, 3]}, "b": {"weighted": [[5, 1]]}}
        }"#,
    )
    .unwrap();
    let (code, out, _) = run(&["close", "--config", path_str(&cfg), "--log", path_str(&log)]);
    assert_eq!(code, 0, "{out}");
    let text = fs::read_to_string(&log).unwrap();
    for line in text.lines().skip(1) {
        let stim = line.split(',').nth(3).unwrap();
        let (a, b) = stim.split_once('|').unwrap();
        assert!(u64::from_str_radix(a, 16).unwrap() <= 3);
        assert_eq!(b, "5");
    }
}

#[test]
fn saved_model_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("net.json");
    let log_a = dir.path().join("a.csv");
    let log_b = dir.path().join("b.csv");
    let base = [
        "close",
        "--dut",
        "comparator",
        "--width",
        "3",
        "--method",
        "ann",
        "--seed",
        "5",
        "--train-transactions",
        "60",
    ];
    let mut a = base.to_vec();
    a.extend(["--save-model", path_str(&model), "--log", path_str(&log_a)]);
    assert_eq!(run(&a).0, 0);
    let mut b = base.to_vec();
    b.extend(["--load-model", path_str(&model), "--log", path_str(&log_b)]);
    assert_eq!(run(&b).0, 0);
    assert_eq!(fs::read(&log_a).unwrap(), fs::read(&log_b).unwrap());

    let mut wrong = vec![
        "close",
        "--dut",
        "comparator",
        "--width",
        "2",
        "--method",
        "ann",
        "--seed",
        "5",
    ];
    wrong.extend(["--load-model", path_str(&model)]);
    assert_eq!(run(&wrong).0, 3);
}

#[test]
fn compare_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.json");
    let svg = dir.path().join("c.svg");
    let (code, out, _) = run(&[
        "compare",
        "--dut",
        "comparator",
        "--widths",
        "1,2,3",
        "--seeds",
        "10",
        "--out",
        path_str(&r),
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with('1') && lines[4].starts_with('3'));

    let report = read_report_json(&r).unwrap();
    assert_eq!(report.schema, REPORT_SCHEMA);
    assert_eq!(report.cells.len(), 6);

    let (code, table, _) = run(&["report", "--in", path_str(&r), "--table"]);
    assert_eq!(code, 0);
    assert_eq!(table, out);

    let (code, _, _) = run(&["report", "--in", path_str(&r), "--svg", path_str(&svg)]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert_eq!(text.matches("<polyline").count(), 6);

    assert_eq!(
        run(&["report", "--in", path_str(&dir.path().join("missing.json"))]).0,
        3
    );
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"schema\": 1").unwrap();
    assert_eq!(run(&["report", "--in", path_str(&bad)]).0, 3);
    fs::write(
        &bad,
        fs::read_to_string(&r)
            .unwrap()
            .replacen("\"schema\": 1", "\"schema\": 99", 1),
    )
    .unwrap();
    assert_eq!(run(&["report", "--in", path_str(&bad)]).0, 3);
}

#[test]
fn compare_reports_non_convergence_as_result() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.json");
    let (code, out, _) = run(&[
        "compare",
        "--dut",
        "comparator",
        "--widths",
        "4",
        "--seeds",
        "2",
        "--cap",
        "20",
        "--out",
        path_str(&r),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains(">20"), "{out}");
    let json = fs::read_to_string(&r).unwrap();
    assert!(json.contains("\"median_iterations\": null"));
}

#[test]
fn bughunt_contract() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bugs.csv");
    let (code, out, _) = run(&[
        "bughunt",
        "--dut",
        "alu",
        "--width",
        "4",
        "--iterations",
        "500",
        "--seed",
        "3",
        "--log",
        path_str(&log),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("failure-directed failures: "));
    assert!(out.contains("random failures: "));
    assert!(out.contains("ratio: "));
    let fails: Vec<&str> = out.lines().filter(|l| l.starts_with("FAIL ")).collect();
    assert!(!fails.is_empty());
    for f in fails {
        let fields: Vec<&str> = f.split_whitespace().collect();
        assert_eq!(fields[1], "op=1");
        assert_eq!(fields[2].trim_start_matches("a="), fields[3].trim_start_matches("b="));
    }
    assert!(fs::read_to_string(&log).unwrap().contains(",FAIL,"));

    assert_eq!(
        run(&[
            "bughunt",
            "--dut",
            "alu",
            "--width",
            "4",
            "--iterations",
            "0",
            "--seed",
            "3"
        ])
        .0,
        3
    );
    assert_eq!(
        run(&[
            "bughunt",
            "--dut",
            "alu",
            "--width",
            "4",
            "--iterations",
            "5",
            "--seed",
            "3",
            "--pool",
            "0"
        ])
        .0,
        3
    );
}

#[test]
fn unwritable_outputs_exit_three() {
    let (code, _, err) = run(&[
        "close",
        "--dut",
        "comparator",
        "--width",
        "1",
        "--method",
        "random",
        "--seed",
        "1",
        "--log",
        "/nonexistent/dir/x.csv",
    ]);
    assert_eq!(code, 3);
    assert!(!err.is_empty());
}

const TOKENS: &[&str] = &[
    "close",
    "compare",
    "bughunt",
    "report",
    "--dut",
    "comparator",
    "alu",
    "widget",
    "--width",
    "0",
    "1",
    "2",
    "3",
    "65",
    "-1",
    "x",
    "--method",
    "random",
    "ann",
    "--seed",
    "--cap",
    "50",
    "--goal",
    "0.5",
    "1.5",
    "nan",
    "--widths",
    "1,2",
    "0,1",
    "--seeds",
    "--iterations",
    "20",
    "--pool",
    "8",
    "--epochs",
    "5",
    "--hidden",
    "4,4",
    "--learning-rate",
    "--train-transactions",
    "--retrain-interval",
    "--attempts",
    "--bin-order",
    "lowest",
    "--goal-encoding",
    "direct",
    "decomposed",
    "--in",
    "--table",
    "--svg",
    "--out",
    "--log",
    "--config",
    "--load-model",
    "--save-model",
    "--help",
    "--bogus",
    "",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn fuzzed_flags_exit_cleanly(picks in prop::collection::vec(0..TOKENS.len(), 0..12)) {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("f").to_string_lossy().into_owned();
        let args: Vec<&str> = picks
            .iter()
            .map(|&i| match TOKENS[i] {
                // The empty token stands for a scratch file path.
                "" => file.as_str(),
                t => t,
            })
            .collect();
        let (code, _, _) = run(&args);
        prop_assert!([0, 2, 3].contains(&code), "{args:?} -> {code}");
    }
}
