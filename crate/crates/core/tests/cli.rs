use std::process::Command;

use prioage::cli::{self, SWEEP_COLUMNS};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_prioage");

fn prioage(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// In-process run, for cases that do not need a real exit status.
fn run(args: &[&str]) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("prioage").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const PSTAR: [&str; 8] = ["--l1", "2", "--l2", "5", "--m1", "10", "--m2", "5"];

fn with_pstar<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(&PSTAR);
    v.extend_from_slice(extra);
    v
}

#[test]
fn analyze_reference_point() {
    let (code, out, _) = prioage(&with_pstar("analyze", &[]));
    assert_eq!(code, 0);
    assert!(out.contains("pi0               0.3"), "{out}");
    assert!(out.contains("age lower bound 1 0.80285"), "{out}");

    let (code, out, _) = run(&with_pstar("analyze", &["--format", "json"]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let f = |k: &str| v[k].as_f64().unwrap();
    assert!((f("pi0") - 0.3).abs() < 1e-12);
    assert!((f("e_n") - 1.0).abs() < 1e-12);
    assert!((f("peak_age_1") - 1.0).abs() < 1e-12);
    assert!((f("age_u2") - 0.4).abs() < 1e-12);
    assert!((f("age_lb_1") - 0.80287).abs() < 5e-5);
    assert!((f("mean_z") - 0.242857).abs() < 1e-6);
    assert!((f("rho") - 0.4).abs() < 1e-12);
    assert!(f("alpha1") > f("alpha2"));
    assert_eq!(v["stable"], Value::Bool(true));
}

#[test]
fn analyze_at_boundary_is_unstable() {
    let (code, out, _) = prioage(&["analyze", "--l1", "2", "--l2", "20", "--m1", "10", "--m2", "5", "--format", "json"]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["stable"], Value::Bool(false));
    assert_eq!(v["peak_age_1"], Value::Null);
    assert_eq!(v["margin"].as_f64(), Some(0.0));
}

#[test]
fn invalid_input_exit_code() {
    let (code, _, err) = prioage(&["analyze", "--l1", "-1", "--l2", "5", "--m1", "10", "--m2", "5"]);
    assert_eq!(code, 2);
    assert!(err.contains("lambda1"), "{err}");
    let (code, _, _) = prioage(&["analyze", "--l1", "2"]);
    assert_eq!(code, 2);
    let (code, _, _) = prioage(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, out, _) = prioage(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sweep"));
}

#[test]
fn simulate_zero_deliveries_rejected() {
    let (code, _, err) = prioage(&with_pstar("simulate", &["--deliveries", "0"]));
    assert_eq!(code, 2);
    assert!(err.contains("invalid configuration"), "{err}");
}

#[test]
fn simulate_fictitious_matches_lower_bound() {
    let (code, out, _) = run(&with_pstar(
        "simulate",
        &["--mode", "fictitious", "--seed", "7", "--deliveries", "1000000"],
    ));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let age = v["result"]["avg_age_1"].as_f64().unwrap();
    assert!((age / 0.80287 - 1.0).abs() < 0.02, "{age}");
    assert_eq!(v["config"]["mode"], "fictitious_system");
    assert_eq!(v["result"]["deliveries_observed"].as_u64(), Some(1_000_000));
}

fn sweep_args<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "sweep", "--l1", "2", "--m1", "10", "--m2", "5", "--sweep", "l2", "--from", "1", "--to",
        "22", "--points", "8",
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn sweep_csv_schema_and_determinism() {
    let (code, first, err) = run(&sweep_args(&["--deliveries", "5000", "--seed", "3"]));
    assert_eq!(code, 0, "{err}");
    let (_, second, _) = run(&sweep_args(&["--deliveries", "5000", "--seed", "3"]));
    assert_eq!(first, second, "same seed must give byte-identical CSV");
    let (_, other, _) = run(&sweep_args(&["--deliveries", "5000", "--seed", "4"]));
    assert_ne!(first, other);

    let mut rdr = csv::Reader::from_reader(first.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, SWEEP_COLUMNS);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    let swept: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(swept.windows(2).all(|w| w[0] < w[1]));
    assert_eq!((swept[0], swept[7]), (1.0, 22.0));
    let mut seeds = std::collections::HashSet::new();
    for r in &rows {
        let stable = &r[14] == "true";
        let v: f64 = r[0].parse().unwrap();
        assert_eq!(stable, v < 20.0);
        if stable {
            assert!(r.iter().take(14).all(|f| !f.is_empty()));
            assert!(seeds.insert(r[12].to_string()));
            assert_eq!(&r[13], "5000");
        } else {
            for col in [2, 3, 4, 5, 8, 9, 10, 11, 12, 13] {
                assert!(r[col].is_empty(), "column {} should be empty", SWEEP_COLUMNS[col]);
            }
            assert!(!r[1].is_empty());
        }
    }
}

#[test]
fn sweep_floats_round_trip() {
    let (_, out, _) = run(&sweep_args(&["--no-sim"]));
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let p = prioage::ModelParams::new(2.0, 1.0, 10.0, 5.0).unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    let peak: f64 = row[4].parse().unwrap();
    assert_eq!(peak, prioage::analytic::peak_age_ordinary(&p).unwrap());
    assert!(row.iter().skip(8).take(6).all(str::is_empty));
}

#[test]
fn sweep_json_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let path_s = path.to_str().unwrap();
    let (code, out, _) = run(&sweep_args(&["--no-sim", "--format", "json", "--out", path_s]));
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 8);
    assert_eq!(v[0]["sim_age_1"], Value::Null);
}

#[test]
fn sweep_rejects_bad_grid() {
    let (code, _, err) = run(&[
        "sweep", "--l1", "2", "--m1", "10", "--m2", "5", "--sweep", "l2", "--from", "5", "--to",
        "1", "--points", "3",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("strictly increasing"), "{err}");
    let (code, _, _) = run(&[
        "sweep", "--l2", "2", "--m1", "10", "--m2", "5", "--sweep", "l1", "--from", "-1", "--to",
        "1", "--points", "3",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# reference point\nl1 = 2\nl2 = 20\nm1 = 10\nm2 = 5\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let (code, out, _) = run(&["analyze", "--config", cfg]);
    assert_eq!(code, 2, "l2 = 20 from the file is unstable");
    assert!(out.contains("\"stable\": false"));

    let (code, out, _) = run(&["analyze", "--config", cfg, "--l2", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"pi0\": 0.3"), "{out}");

    std::fs::write(dir.path().join("bad.conf"), "speed = 3\n").unwrap();
    let bad = dir.path().join("bad.conf");
    let (code, _, err) = run(&["analyze", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown key"));
}

#[test]
fn validate_single_criterion() {
    let (code, out, _) = prioage(&["validate", "--quick", "--criterion", "1"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("PASS criterion 1"));
    assert!(out.contains("expected"));
    let (code, _, _) = prioage(&["validate", "--criterion", "12"]);
    assert_eq!(code, 2);
}
