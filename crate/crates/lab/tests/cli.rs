use std::path::Path;
use std::process::{Command as Proc, Output};

use serde_json::Value;
use silt_lab::{Command, RunConfig};

fn silt(args: &[&str], out: &Path) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_silt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SILT_THREADS")
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn metadata(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap()
}

#[test]
fn expect_alpha_equality_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = silt(&["expect", "alpha", "--s", "1", "--t", "1"], dir.path());
    assert!(o.status.success());
    let v = metadata(dir.path())["results"]["values"]["alpha_limit"].as_f64().unwrap();
    assert!((v - 0.220636).abs() < 1e-6);
    assert!(String::from_utf8_lossy(&o.stdout).contains("alpha_limit"));
}

#[test]
fn gn_table_reports_the_constant() {
    let dir = tempfile::tempdir().unwrap();
    assert!(silt(&["gn"], dir.path()).status.success());
    let rows = csv_rows(&dir.path().join("gn.csv"));
    let gamma: f64 = rows.iter().find(|r| r[0] == "gamma_beta").unwrap()[1].parse().unwrap();
    assert!((gamma - 5.85043).abs() < 1e-3);
}

#[test]
fn config_errors_exit_2_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = silt(&["beta", "--dt", "0.01", "--eps", "0.02"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "config");
    let o = silt(&["tails", "--kind", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    // every replica sits far below the threshold
    let dir = tempfile::tempdir().unwrap();
    let o = silt(
        &["tails", "--kind", "beta-upper", "--replicas", "20", "--dt", "0.0625", "--eps", "0.25", "--thresholds", "50,60"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "numerical");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"replicas": 12, "seed": 5, "dt": 0.0625, "eps": 0.25}"#).unwrap();
    let out = dir.path().join("o");
    let o = silt(&["beta", "--config", cfg.to_str().unwrap(), "--seed", "6"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let eff = &metadata(&out)["effective_config"];
    assert_eq!(eff["replicas"], 12);
    assert_eq!(eff["seed"], 6);
    // the dumped effective config reproduces the run
    let again: RunConfig = serde_json::from_value(eff.clone()).unwrap();
    assert_eq!(again.seed, 6);
    assert_eq!(csv_rows(&out.join("beta.csv")).len(), 12);
}

#[test]
fn thread_count_never_changes_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [("1", "a"), ("4", "b")];
    for (threads, name) in runs {
        let o = silt(
            &["tails", "--kind", "beta", "--replicas", "300", "--dt", "0.03125", "--eps", "0.125", "--thresholds", "0,0.05,0.1,0.2", "--levels", "0,0.05,0.1,0.2", "--threads", threads],
            &dir.path().join(name),
        );
        assert!(o.status.success());
    }
    for f in ["tails_beta_upper.csv", "tails_beta_lower.csv", "l_proxy.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let fa = metadata(&dir.path().join("a"))["config_fingerprint"].clone();
    assert_eq!(fa, metadata(&dir.path().join("b"))["config_fingerprint"]);
}

#[test]
fn tails_log_survival_is_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let o = silt(
        &["tails", "--kind", "beta-upper", "--replicas", "400", "--dt", "0.03125", "--eps", "0.125", "--thresholds", "0,0.1,0.2,0.4,0.8"],
        dir.path(),
    );
    assert!(o.status.success());
    let rows = csv_rows(&dir.path().join("tails_beta_upper.csv"));
    let ls: Vec<f64> = rows.iter().filter(|r| !r[3].is_empty()).map(|r| r[3].parse().unwrap()).collect();
    assert!(ls.windows(2).all(|w| w[0] >= w[1]));
    let counts: Vec<u64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn library_run_matches_binary() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::defaults(Command::DecompCheck);
    c.replicas = 10;
    c.out = dir.path().join("lib");
    let outcome = silt_lab::run(&c).unwrap();
    assert!(outcome.report.results["max_rel_gap"].as_f64().unwrap() <= 1e-12);
    assert!(silt(&["decomp-check", "--replicas", "10"], &dir.path().join("bin")).status.success());
    let a = std::fs::read(dir.path().join("lib/decomp.csv")).unwrap();
    let b = std::fs::read(dir.path().join("bin/decomp.csv")).unwrap();
    assert_eq!(a, b);
}
