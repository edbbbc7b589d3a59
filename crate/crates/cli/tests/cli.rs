use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn gardner(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gardner"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn only(dir: &Path, suffix: &str) -> PathBuf {
    let hits: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    assert_eq!(hits.len(), 1, "{suffix}: {hits:?}");
    hits[0].clone()
}

fn records(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn verify_passes_every_gated_identity() {
    let d = tempfile::tempdir().unwrap();
    let o = gardner(d.path(), &["verify", "--alpha", "1", "--beta", "1", "--mu", "0.5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 11);
    assert_eq!(out.lines().filter(|l| l.starts_with("INFO")).count(), 2);
    assert!(!out.contains("FAIL"));

    let recs = records(&only(d.path(), ".jsonl"));
    assert_eq!(recs.len(), 13);
    for r in &recs {
        for k in ["identity", "alpha", "beta", "mu", "t", "sup_residual", "rel_scale", "pass", "version", "config_hash"] {
            assert!(r.get(k).is_some(), "{k} missing in {r}");
        }
    }
    let name = only(d.path(), ".jsonl").file_name().unwrap().to_string_lossy().into_owned();
    assert!(name.starts_with("verify-") && name.contains(recs[0]["config_hash"].as_str().unwrap()));
    assert!(only(d.path(), ".csv").exists());
}

#[test]
fn spectrum_sweep_has_one_negative_direction_everywhere() {
    let d = tempfile::tempdir().unwrap();
    let o = gardner(d.path(), &["spectrum", "--sweep-mu", "0.1:0.9:5", "--trials", "20", "--json"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let recs = records(&only(d.path(), ".jsonl"));
    assert_eq!(recs.len(), 5);
    for r in &recs {
        assert_eq!(r["negative_count"], 1);
        assert_eq!(r["kernel_dim"], 2);
        assert_eq!(r["f_mu_root_count"], 1);
        assert_eq!(r["eigenvalues"].as_array().unwrap().len(), 8);
        for k in ["lambda0_sq", "subspace_angle", "nu_measured", "wronskian_max_rel_err"] {
            assert!(r[k].is_f64(), "{k}");
        }
    }
    // --json alone suppresses the CSV
    assert!(fs::read_dir(d.path()).unwrap().all(|e| !e.unwrap().path().to_string_lossy().ends_with(".csv")));
}

#[test]
fn simulate_returns_to_the_orbit() {
    let d = tempfile::tempdir().unwrap();
    let o = gardner(d.path(), &["simulate", "--plot"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = fs::read_to_string(only(d.path(), ".csv")).unwrap();
    assert!(csv.starts_with("t,distance_H2,x1,x2,M,E,F,H\r\n"));
    assert_eq!(csv.lines().count(), 1 + 9);
    let dist = fs::read_to_string(only(d.path(), "-distance.dat")).unwrap();
    for l in dist.lines().skip(1) {
        assert_eq!(l.split_whitespace().count(), 2);
    }
    assert!(only(d.path(), "-profile-final.dat").exists());
}

#[test]
fn coarse_steps_fail_the_return_check() {
    let d = tempfile::tempdir().unwrap();
    let o = gardner(d.path(), &["simulate", "--dt", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("return@(1,1,0.5)"));
}

#[test]
fn short_stability_run_is_bounded_and_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let args = ["stability", "--eta", "1e-3", "--periods", "2", "--seed", "7", "--grid-N", "1024"];
    let o = gardner(d.path(), &args);
    assert!(o.status.success(), "{}", stdout(&o));
    let r = &records(&only(d.path(), ".jsonl"))[0];
    assert_eq!(r["captured"], true);
    assert!(r["amplification"].as_f64().unwrap() < 50.0);
    assert!(r.get("samples").is_none());
    let first = fs::read(only(d.path(), ".jsonl")).unwrap();
    gardner(d.path(), &args);
    assert_eq!(first, fs::read(only(d.path(), ".jsonl")).unwrap());
}

#[test]
fn sweep_is_deterministic_and_records_skips() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["sweep", "--sweep-alpha", "0.5:1:2", "--sweep-mu", "0.2:1.2:3", "--csv"];
    assert!(gardner(a.path(), &args).status.success());
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert!(gardner(b.path(), &seq).status.success());
    let x = fs::read(only(a.path(), ".csv")).unwrap();
    assert_eq!(x, fs::read(only(b.path(), ".csv")).unwrap());

    let text = String::from_utf8(x).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,beta,mu,quantity,quadrature,closed_form,rel_err,status"));
    let rows: Vec<&str> = lines.collect();
    let skipped = rows.iter().filter(|r| r.contains("skipped:")).count();
    // mu = 1.2 is beyond mu_max for both alphas
    assert_eq!(skipped, 2);
    assert_eq!(rows.len(), skipped + 4 * 7);
    assert!(rows.iter().filter(|r| !r.contains("skipped:")).all(|r| r.ends_with(",pass")));
}

#[test]
fn closed_forms_print_every_quantity() {
    let d = tempfile::tempdir().unwrap();
    let o = gardner(d.path(), &["closed-forms", "--mu", "0"]);
    assert!(o.status.success());
    let recs = records(&only(d.path(), ".jsonl"));
    assert_eq!(recs.len(), 15);
    let m = recs.iter().find(|r| r["quantity"] == "breather-mass").unwrap();
    assert!((m["value"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "--mu", "5"],
        vec!["verify", "--bogus"],
        vec!["spectrum", "--sweep-mu", "1:2"],
        vec!["stability", "--eta", "0.1", "--periods", "1"],
        vec!["simulate", "--sweep-mu", "0.1:0.2:2"],
        vec!["simulate", "--dt", "-1"],
    ] {
        let o = gardner(d.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let bad = d.path().join("bad.toml");
    fs::write(&bad, "[params]\ngamma = 3\n").unwrap();
    let o = gardner(d.path(), &["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    fs::write(&cfg, "[params]\nalpha = 0.5\nmu = 0.2\n\n[output]\ncsv = true\n").unwrap();
    let c = cfg.to_str().unwrap();

    let a = d.path().join("a");
    let o = Command::new(env!("CARGO_BIN_EXE_gardner"))
        .args(["verify", "--config", c, "--mu", "0.3", "--output-dir"])
        .arg(&a)
        .output()
        .unwrap();
    assert!(o.status.success());
    let csv = fs::read_to_string(only(&a, ".csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("square,0.5,1.0,0.3,"));
    assert!(fs::read_dir(&a).unwrap().all(|e| !e.unwrap().path().to_string_lossy().ends_with(".jsonl")));

    // same numbers, different output directory: same hash
    let b = d.path().join("b");
    Command::new(env!("CARGO_BIN_EXE_gardner"))
        .args(["verify", "--alpha", "0.5", "--mu", "0.3", "--csv", "--output-dir"])
        .arg(&b)
        .output()
        .unwrap();
    assert_eq!(only(&a, ".csv").file_name(), only(&b, ".csv").file_name());
}
