use std::path::PathBuf;
use std::process::Command;

use fpmine::cli::run_cli;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(
        std::iter::once("fpmine").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn mine_db5_with_apriori() {
    let db5 = fixture("db5.csv");
    let (code, out, _) = run(&["mine", "--algorithm", "apriori", "--min-support", "3", &db5]);
    assert_eq!(code, 0);
    assert_eq!(out, "itemset,support\na,4\nb,4\nc,4\na|b,3\na|c,3\nb|c,3\n");
}

#[test]
fn miners_print_the_same_table() {
    let db5 = fixture("db5.csv");
    let outputs: Vec<String> = ["apriori", "fpgrowth", "bruteforce"]
        .iter()
        .map(|alg| {
            run(&[
                "mine",
                "--algorithm",
                alg,
                "--min-support-frac",
                "0.4",
                &db5,
            ])
            .1
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert!(outputs[0].contains("a|b|c,2\n"));
}

#[test]
fn dump_tree_writes_the_fp_tree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.txt");
    let db5 = fixture("db5.csv");
    let (code, _, _) = run(&[
        "mine",
        "--algorithm",
        "fpgrowth",
        "--min-support",
        "3",
        "--dump-tree",
        path.to_str().unwrap(),
        &db5,
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "a:4\n  b:3\n    c:2\n  c:1\nb:1\n  c:1\n"
    );
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, out, err) = run(&["mine", "--bogus"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn support_flags_are_exclusive() {
    let db5 = fixture("db5.csv");
    let (code, _, _) = run(&[
        "mine",
        "--min-support",
        "2",
        "--min-support-frac",
        "0.5",
        &db5,
    ]);
    assert_eq!(code, 2);
}

#[test]
fn unreadable_input_is_a_data_error() {
    let (code, _, err) = run(&["mine", "--min-support", "1", "/no/such/file.csv"]);
    assert_eq!(code, 1);
    assert!(err.contains("/no/such/file.csv"));
}

#[test]
fn rules_from_support_fixture() {
    let supports = fixture("survey_apriori_supports.csv");
    let (code, out, _) = run(&[
        "rules",
        "--support-fixture",
        &supports,
        "--min-confidence",
        "0.40",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("antecedent,consequent,support,confidence,status\n"));
    assert!(out.contains("Ongoing fears,Under 18,595,0.6918604651162791,Accepted\n"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",Accepted")));
}

#[test]
fn rules_boundary_is_inclusive() {
    let db5 = fixture("db5.csv");
    let args = ["rules", &db5, "--min-support", "3", "--min-confidence"];
    let (_, out, _) = run(&[&args[..], &["3/4"]].concat());
    assert_eq!(out.lines().count(), 7);
    let (_, out, _) = run(&[&args[..], &["76%"]].concat());
    assert_eq!(out.lines().count(), 1);
    let (_, out, _) = run(&[&args[..], &["0.76", "--include-rejected"]].concat());
    assert_eq!(out.matches(",Rejected").count(), 6);
}

#[test]
fn bad_confidence_is_rejected() {
    let db5 = fixture("db5.csv");
    let (code, _, _) = run(&[
        "rules",
        &db5,
        "--min-support",
        "3",
        "--min-confidence",
        "1.5",
    ]);
    assert_ne!(code, 0);
}

#[test]
fn recode_survey() {
    let survey = fixture("survey_sample.csv");
    let (code, out, _) = run(&["recode", &survey]);
    assert_eq!(code, 0);
    let first = out.lines().next().unwrap();
    assert!(
        first.contains("Under 18") && first.contains("Intense fear"),
        "{out}"
    );
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn check_agrees_on_random_cases() {
    let (code, out, _) = run(&["check", "--seed", "7", "--cases", "1000"]);
    assert_eq!(code, 0);
    assert!(out.contains("1000 cases agree"), "{out}");
}

#[test]
fn bench_report_formats() {
    let base = [
        "bench",
        "--n-transactions",
        "300",
        "--n-items",
        "12",
        "--mean-len",
        "4",
        "--reps",
        "2",
        "--axis",
        "min_support",
        "--values",
        "0.1,5",
    ];
    let (code, csv, _) = run(&base);
    assert_eq!(code, 0);
    let rows = fpmine::bench::parse_report_csv(&csv).unwrap();
    assert_eq!(rows.len(), 4);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0].n_frequent, pair[1].n_frequent);
    }

    let (code, json, _) = run(&[&base[..], &["--format", "json"]].concat());
    assert_eq!(code, 0);
    let report = fpmine::bench::parse_report_json(&json).unwrap();
    assert_eq!(report.config.repetitions, 2);
    assert_eq!(report.rows.len(), 4);
}

#[test]
fn bench_rejects_bad_axis_value() {
    let (code, _, err) = run(&[
        "bench", "--axis", "n_items", "--values", "2.5", "--reps", "1",
    ]);
    assert_ne!(code, 0);
    assert!(!err.is_empty());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fpmine");
    let ok = Command::new(bin)
        .args(["mine", "--min-support", "3", &fixture("db5.csv")])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).lines().count(), 7);
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
