use std::path::Path;
use std::process::{Command, Output};

use hybridcs::dictionary::analyze;
use hybridcs::io::load_dictionary;
use hybridcs::threshold::{check_cond_a, check_cond_b, check_l0_l1, default_gamma_grid, TheoremParams};
use serde_json::Value;

fn hybridcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridcs")).args(args).output().expect("spawn hybridcs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn build(dir: &Path, args: &[&str]) -> String {
    let path = dir.join("d.dict.json").to_str().unwrap().to_owned();
    let mut full = vec!["build-dict"];
    full.extend_from_slice(args);
    full.extend(["-o", &path]);
    assert!(hybridcs(&full).status.success());
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_dict_writes_mub_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--mub", "7"]);
    let d = load_dictionary::<f64>(&path).unwrap();
    assert_eq!((d.m(), d.n()), (7, 56));
}

#[test]
fn build_dict_prints_coherence() {
    let out = hybridcs(&["build-dict", "--two-onb", "8"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("0.35355339"));
}

#[test]
fn build_dict_rejects_even_p() {
    let out = hybridcs(&["build-dict", "--mub", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must be an odd prime"));
}

#[test]
fn check_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--mub", "7"]);
    let ok = hybridcs(&["check", "--dict", &path, "--na", "0", "--nb", "0", "--s", "1", "--gamma", "0.5"]);
    assert_eq!(ok.status.code(), Some(0));
    let fail = hybridcs(&["check", "--dict", &path, "--na", "2", "--nb", "2", "--s", "1", "--gamma", "0.5"]);
    assert_eq!(fail.status.code(), Some(3));
    let missing = hybridcs(&["check", "--dict", tmp.path().join("nope.dict.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn check_refuses_tiny_dictionaries() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--random", "2", "2"]);
    let out = hybridcs(&["check", "--dict", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N > 2"));
}

#[test]
fn check_json_carries_full_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--mub", "5"]);
    let out = hybridcs(&["check", "--dict", &path, "--na", "1", "--nb", "1", "--json"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let conditions = report["conditions"].as_array().unwrap();
    assert!(conditions.iter().any(|c| c["id"] == "eq3"));
    assert!(conditions.iter().all(|c| c["lhs"].is_number()));
}

#[test]
fn maximize_matches_scan() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--mub", "7"]);
    let out = hybridcs(&["check", "--dict", &path, "--maximize", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let search: Value = serde_json::from_slice(&out.stdout).unwrap();

    let stats = analyze(&load_dictionary::<f64>(&path).unwrap());
    let mut best = (0usize, 0usize, 0.0f64);
    for gamma in default_gamma_grid::<f64>() {
        for na in 0..=stats.na {
            for nb in 0..=stats.nb {
                let p = TheoremParams { s: 1.0, gamma, na, nb };
                let (eq5, eq6) = check_l0_l1(stats.mu, stats.n, &p);
                let ok = check_cond_a(stats.mu, stats.mu_a, stats.n, &p).satisfied
                    && check_cond_b(stats.mu_b, stats.spec_a, stats.spec_b, stats.nb, stats.n, &p).satisfied
                    && eq5.satisfied
                    && eq6.satisfied;
                if ok && (na + nb, na) > (best.0 + best.1, best.0) {
                    best = (na, nb, gamma);
                }
            }
        }
    }
    assert_eq!(search["best_na"], best.0);
    assert_eq!(search["best_nb"], best.1);
    assert_eq!(search["best_gamma"].as_f64().unwrap(), best.2);
}

#[test]
fn smin_is_reproducible_and_reports_tail_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--mub", "7"]);
    let mut csv = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let o = hybridcs(&[
            "smin",
            "--dict",
            &path,
            "--na",
            "1",
            "--nb",
            "1",
            "--trials",
            "1000",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        csv.push(std::fs::read(out.join("smin.csv")).unwrap());
    }
    assert_eq!(csv[0], csv[1]);
    let summary = read_json(&tmp.path().join("a/smin.json"));
    let bound = summary["lemma1_bound"].as_f64().unwrap();
    assert!((bound - 1.0 / 56.0).abs() < 1e-15);
    assert_eq!(summary["chain_violations"], 0);
    assert!(std::fs::read_to_string(tmp.path().join("a/smin.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn recover_sweep_origin_cell_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--two-onb", "4"]);
    let out = tmp.path().join("sweep");
    let o = hybridcs(&["recover", "--dict", &path, "--sweep", "--trials", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "nA,nB,strategy,trials,successes,rate");
    assert!(csv.lines().any(|l| l == "0,0,first-n,3,3,1"));
}

#[test]
fn moments_rejects_low_order() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--mub", "5"]);
    let out = tmp.path().join("m");
    let o = hybridcs(&[
        "moments",
        "--dict",
        &path,
        "--na",
        "1",
        "--nb",
        "8",
        "--q",
        "4",
        "--trials",
        "1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("exp.json");
    std::fs::write(
        &config,
        r#"{"dictionary": {"kind": "mub", "p": 5}, "na": 1, "nb": 2, "trials": 50, "masterSeed": 4, "outputDir": "res"}"#,
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    assert!(hybridcs(&["smin", "--config", cfg]).status.success());
    let summary = read_json(&tmp.path().join("res/smin.json"));
    assert_eq!(
        (summary["na"].as_u64(), summary["nb"].as_u64(), summary["trials"].as_u64()),
        (Some(1), Some(2), Some(50))
    );

    let out = tmp.path().join("flags");
    assert!(hybridcs(&["smin", "--config", cfg, "--nb", "3", "--trials", "20", "--out", out.to_str().unwrap()])
        .status
        .success());
    let summary = read_json(&out.join("smin.json"));
    assert_eq!((summary["nb"].as_u64(), summary["trials"].as_u64()), (Some(3), Some(20)));

    std::fs::write(&config, r#"{"trials": 0}"#).unwrap();
    assert_eq!(hybridcs(&["smin", "--config", cfg]).status.code(), Some(2));
}

#[test]
fn report_and_analyze_write_bundles() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build(tmp.path(), &["--mub", "5"]);
    let out = tmp.path().join("r");
    assert!(hybridcs(&["report", "--dict", &path, "--out", out.to_str().unwrap()]).status.success());
    for name in ["report.json", "report.md", "report.svg"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let analysis = hybridcs(&["analyze", "--dict", &path, "--json"]);
    let value: Value = serde_json::from_slice(&analysis.stdout).unwrap();
    assert!((value["stats"]["mu"].as_f64().unwrap() - 1.0 / 5f64.sqrt()).abs() < 1e-12);
}
