//! End-to-end behaviour of the runner and the `verify` binary.

use std::path::Path;
use std::process::Command;

use twistorlab_cli::config::Suite;
use twistorlab_cli::report::{csv_profiles, csv_summary, profile_rows};
use twistorlab_cli::runner::build_instance;
use twistorlab_cli::{parse_config, run, to_json, Format};
use twistorlab_core::Status;

fn configs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn verify(args: &[&str], env: &[(&str, &str)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_verify"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn sasakian_run_reports_f_constant_with_unit_f() {
    let cfg = parse_config("family.kind = sasakian_sphere\nfamily.k = 1\nrun.samples = 40\n").unwrap();
    let r = run(&cfg);
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.summary.classification.as_deref(), Some("f-constant"));
    let f = r.summary.f.unwrap();
    assert!((f.mean.abs() - 1.0).abs() < 1e-8 && f.std < 1e-8, "{f:?}");
    assert_eq!(r.summary.k, Some(1.0));
}

#[test]
fn rejected_join_names_the_origin() {
    let cfg = parse_config(&std::fs::read_to_string(configs_dir().join("bad_join.conf")).unwrap()).unwrap();
    let r = run(&cfg);
    assert_eq!(r.exit_code(), 2);
    assert!(r.construction_error.as_deref().unwrap().starts_with("origin boundary condition"));
    assert!(r.suites.is_empty());
}

#[test]
fn section3_is_not_applicable_in_dimension_three() {
    let cfg = parse_config("family.kind = round_sphere\nfamily.n = 3\nrun.samples = 10\nrun.suites = section3\n").unwrap();
    let r = run(&cfg);
    let recs = &r.suites[0].records;
    assert_eq!(r.suites[0].suite, Suite::Section3);
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|x| x.status == Status::NotApplicable));
    assert!(recs[0].note.as_deref().unwrap().contains("n > 3"));
    assert_eq!(r.exit_code(), 0);
}

#[test]
fn empty_selection_gives_an_empty_valid_report() {
    let cfg = parse_config("family.kind = flat\nfamily.n = 2\nrun.suites = none\n").unwrap();
    let r = run(&cfg);
    assert_eq!(r.summary.total, 0);
    assert_eq!(r.exit_code(), 0);
    let v: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
    assert_eq!(v["suites"].as_array().unwrap().len(), 0);
}

#[test]
fn summary_csv_matches_json_aggregation() {
    let cfg = parse_config("family.kind = warped_mapping_torus\nfamily.n = 4\nrun.samples = 20\n").unwrap();
    let r = run(&cfg);
    let json: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
    let csv = csv_summary(&r);
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    let mut checked = 0;
    for row in rows.records() {
        let row = row.unwrap();
        let (suite, identity) = (&row[0], &row[1]);
        let recs: Vec<&serde_json::Value> = json["suites"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|s| s["suite"] == suite)
            .flat_map(|s| s["records"].as_array().unwrap())
            .filter(|x| x["identity"] == identity)
            .collect();
        assert_eq!(row[2].parse::<usize>().unwrap(), recs.len());
        let passed = recs.iter().filter(|x| x["status"] == "pass").count();
        assert_eq!(row[3].parse::<usize>().unwrap(), passed);
        let res: Vec<f64> = recs.iter().filter_map(|x| x["residual"].as_f64()).collect();
        if !res.is_empty() {
            let max = res.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = res.iter().sum::<f64>() / res.len() as f64;
            assert_eq!(row[7].parse::<f64>().unwrap(), max);
            assert_eq!(row[8].parse::<f64>().unwrap(), mean);
        }
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn profile_export_of_the_round_join_has_cosine_lambda() {
    let cfg = parse_config(&std::fs::read_to_string(configs_dir().join("round_join.conf")).unwrap()).unwrap();
    assert!(cfg.formats.contains(&Format::CsvProfiles));
    let inst = build_instance(&cfg).unwrap();
    let rows = profile_rows(&inst);
    let text = csv_profiles(&rows);
    assert!(text.starts_with("s,gamma,lambda,xi_norm,f,K_sample\n"));
    for r in &rows {
        assert!((r.lambda.unwrap() - r.s.cos()).abs() < 1e-10);
        assert!((r.xi_norm.unwrap() - r.s.cos()).abs() < 1e-10);
        assert!((r.k_sample.unwrap() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn binary_is_deterministic_and_honours_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfgs = configs_dir();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let sas = cfgs.join("sasakian_s3.conf");
    for out in [&a, &b] {
        let (code, err) = verify(&[sas.to_str().unwrap(), "--out", out.to_str().unwrap(), "--samples", "30"], &[]);
        assert_eq!(code, 0, "{err}");
    }
    let ja = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ja, std::fs::read(b.join("report.json")).unwrap());

    let (code, _) = verify(&[cfgs.join("corrupted_sphere.conf").to_str().unwrap(), "--out", a.to_str().unwrap()], &[]);
    assert_eq!(code, 1);
    let (code, err) = verify(&[cfgs.join("bad_join.conf").to_str().unwrap(), "--out", a.to_str().unwrap()], &[]);
    assert_eq!(code, 2);
    assert!(err.contains("origin boundary condition"), "{err}");
    let (code, _) = verify(&["/nonexistent.conf"], &[]);
    assert_eq!(code, 2);
}

#[test]
fn flags_and_environment_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let sas = configs_dir().join("sasakian_s3.conf");
    let out = dir.path();
    let (code, err) = verify(
        &[sas.to_str().unwrap(), "--out", out.to_str().unwrap(), "--samples", "7", "--seed", "9", "--format", "csv-summary", "--format", "json"],
        &[("TWISTORLAB_TOL_SCALE", "10")],
    );
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["samples"], 7);
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["tol_scale"].as_f64(), Some(10.0));
    assert!((v["config"]["tolerances"]["order1"].as_f64().unwrap() - 1e-8).abs() < 1e-20);
    assert!(out.join("summary.csv").exists());

    let (code, _) = verify(&[sas.to_str().unwrap(), "--out", out.to_str().unwrap()], &[("TWISTORLAB_TOL_SCALE", "abc")]);
    assert_eq!(code, 2);
    let (code, _) = verify(&[sas.to_str().unwrap(), "--out", out.to_str().unwrap(), "--samples", "0"], &[]);
    assert_eq!(code, 2);
}
