use polyvar::cli::{run, CSV_HEADER, EXIT_ASSERTION, EXIT_OK, EXIT_USAGE};
use polyvar::metrics::ConjectureReport;
use serde_json::Value;

fn run_to(dir: &tempfile::TempDir, name: &str, args: &[&str]) -> (i32, String) {
    let path = dir.path().join(name);
    let mut argv = vec!["polyvar"];
    argv.extend_from_slice(args);
    let p = path.to_str().unwrap().to_string();
    argv.extend_from_slice(&["--out", &p]);
    let code = run(argv);
    (code, std::fs::read_to_string(&path).unwrap_or_default())
}

#[test]
fn moments_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(
        &dir,
        "m.json",
        &["moments", "--body", "cube-proj", "--n", "3", "--theta", "random", "--samples", "20000", "--seed", "7"],
    );
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["seed"], 7);
    assert!(v["meta"]["timestamp-utc"].as_str().unwrap().ends_with('Z'));
    assert_eq!(v["meta"]["argv"][1], "moments");
    assert_eq!(v["config"]["subcommand"], "moments");
    let report: ConjectureReport = serde_json::from_value(v["results"]["report"].clone()).unwrap();
    assert!(report.variance_ratio > 0.0);
    assert_eq!(report.samples, 20_000);
    assert_eq!(report.body, "cube-proj");
    let back = serde_json::to_value(&report).unwrap();
    assert_eq!(back, v["results"]["report"]);
}

#[test]
fn csv_sweep_header_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--body", "cross-proj", "--n-min", "3", "--n-max", "6", "--samples", "20000", "--seed", "5"];
    let mut one = args.to_vec();
    one.extend_from_slice(&["--threads", "1"]);
    let mut three = args.to_vec();
    three.extend_from_slice(&["--threads", "3"]);
    let (c1, a) = run_to(&dir, "a.csv", &one);
    let (c2, b) = run_to(&dir, "b.csv", &three);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    assert!(!a.contains('\r'));
    assert!(lines[1].starts_with("3,cross-proj,"));
}

#[test]
fn moments_csv_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(
        &dir,
        "m.csv",
        &["moments", "--body", "simplex", "--n", "6", "--samples", "5000", "--format", "csv"],
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
}

#[test]
fn verify_snc_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(&dir, "s.json", &["verify-snc", "--n", "50", "--trials", "1000", "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(v["results"]["max_gap"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn oracle_compare_lists_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(
        &dir,
        "o.json",
        &["oracle-compare", "--body", "cross-proj", "--n", "3", "--theta", "coords:0.6,0.64,0.48", "--samples", "100000"],
    );
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&text).unwrap();
    let comparisons = v["results"]["comparisons"].as_array().unwrap();
    assert!(!comparisons.is_empty());
    for c in comparisons {
        assert!(c["delta"].as_f64().unwrap() <= 1e-9, "{c}");
    }
}

#[test]
fn volume_and_theta_specs() {
    let dir = tempfile::tempdir().unwrap();
    let theta_file = dir.path().join("theta.txt");
    std::fs::write(&theta_file, "1 2\n2\n").unwrap();
    let spec = format!("file:{}", theta_file.display());
    let (code, text) = run_to(&dir, "v.json", &["volume", "--body", "cube-proj", "--n", "3", "--theta", &spec]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&text).unwrap();
    // θ = (1,2,2)/3, ‖θ‖₁ = 5/3, volume 4·5/3
    assert!((v["results"]["volume"].as_f64().unwrap() - 20.0 / 3.0).abs() < 1e-12);
    assert!(v["results"]["relative_delta"].as_f64().unwrap() <= 1e-9);

    let (code, text) = run_to(&dir, "w.json", &["volume", "--body", "cube-proj", "--n", "3", "--theta", "axis:3"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!((v["results"]["volume"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["polyvar"],
        vec!["polyvar", "moments", "--body", "sphere", "--n", "3"],
        vec!["polyvar", "moments", "--body", "cube", "--n", "3", "--samples", "1"],
        vec!["polyvar", "moments", "--body", "cube-proj", "--n", "3", "--theta", "coords:1,2"],
        vec!["polyvar", "moments", "--body", "cube-proj", "--n", "3", "--theta", "axis:0"],
        vec!["polyvar", "sweep", "--body", "cube", "--n-min", "5", "--n-max", "3"],
        vec!["polyvar", "verify-snc", "--n", "2"],
        vec!["polyvar", "oracle-compare", "--body", "cube", "--n", "3"],
        vec!["polyvar", "volume", "--body", "cross-proj", "--n", "30"],
        vec!["polyvar", "rotate", "--t-diag", "1,2"],
    ] {
        assert_eq!(run(args.clone()), EXIT_USAGE, "{args:?}");
    }
    assert_eq!(run(["polyvar", "--help"]), EXIT_OK);
}

#[test]
fn non_isotropic_rotation_base_is_an_assertion_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_to(&dir, "r.json", &["rotate", "--body", "simplex", "--n", "5", "--samples", "20000", "--trials", "2"]);
    assert_eq!(code, EXIT_ASSERTION);
}

#[test]
fn rotate_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(
        &dir,
        "r.json",
        &["rotate", "--n", "4", "--t-diag", "1,1,1,3", "--trials", "4", "--samples", "200000", "--seed", "2"],
    );
    assert_eq!(code, EXIT_OK, "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["results"]["summary"]["per_rotation"].as_array().unwrap().len(), 4);
    assert!((v["results"]["summary"]["hs_norm2"].as_f64().unwrap() - 12.0).abs() < 1e-12);
}
