use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use depdag::report::{emit_report, ExperimentReport};
use depdag_core::experiment::ExperimentConfig;

fn depdag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depdag")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = depdag(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

const SMALL: [&str; 10] = ["--n", "40", "--p", "8", "--replications", "2", "--max-iters", "4", "--n-draws", "30"];

fn small_experiment(out: &Path, extra: &[&str]) {
    let mut args = vec!["experiment", "--seed", "5", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    args.extend(["--num-datasets", "3", "--n-burn", "10"]);
    args.extend(extra);
    ok(&args);
}

#[test]
fn pipeline_subcommands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let out = dir.path().to_str().unwrap();
    ok(&["simulate", "--seed", "3", "--out", out, "--n", "60", "--p", "10"]);
    for f in ["x.csv", "latent.csv", "dag.txt", "truth_cpdag.txt", "sigma.csv", "beta_true.csv", "blocks.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    ok(&["estimate-cov", "--out", out, "--data", &d("x.csv"), "--blocks", &d("blocks.json"), "--beta", &d("beta_true.csv"), "--sigma-true", &d("sigma.csv")]);
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(d("covariance_metrics.json")).unwrap()).unwrap();
    let rmse = metrics["rmse"].as_f64().unwrap();
    assert!((0.0..1.0).contains(&rmse), "{rmse}");

    ok(&["decorrelate", "--out", out, "--data", &d("x.csv"), "--sigma", &d("sigma_hat.csv"), "--blocks", &d("blocks.json"), "--max-iters", "5", "--num-datasets", "3", "--n-burn", "5", "--n-draws", "20"]);
    let datasets: Vec<String> = (0..3).map(|k| d(&format!("decorrelated_{k}.csv"))).collect();
    assert!(datasets.iter().all(|p| Path::new(p).exists()));

    let truth = d("truth_cpdag.txt");
    let mut args = vec!["learn", "--out", out, "--strategy", "consensus", "--truth", &truth, "--data"];
    args.extend(datasets.iter().map(String::as_str));
    ok(&args);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d("learn_metrics.json")).unwrap()).unwrap();
    assert!((0.0..=1.0).contains(&m["f1"].as_f64().unwrap()));

    ok(&["learn", "--out", out, "--data", &d("x.csv")]);
    assert!(dir.path().join("cpdag.txt").exists());
}

#[test]
fn experiment_is_reproducible_and_summary_matches_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_experiment(a.path(), &[]);
    small_experiment(b.path(), &[]);
    for f in ["f1_scores.csv", "sigma_rmse.csv", "beta_trace.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }

    let rows = csv_rows(&a.path().join("f1_scores.csv"));
    assert_eq!(rows.len(), 2 * 3);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
    for s in summary["strategies"].as_array().unwrap() {
        let name = s["strategy"].as_str().unwrap();
        let vals: Vec<f64> = rows.iter().filter(|r| r[2] == name).map(|r| r[5].parse().unwrap()).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((mean - s["f1"].as_f64().unwrap()).abs() < 1e-12, "{name}");
    }
    let rmse: Vec<f64> = csv_rows(&a.path().join("sigma_rmse.csv")).iter().map(|r| r[2].parse().unwrap()).collect();
    let mean = rmse.iter().sum::<f64>() / rmse.len() as f64;
    assert!((mean - summary["mean_sigma_rmse"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn baseline_only_skips_em() {
    let dir = tempfile::tempdir().unwrap();
    small_experiment(dir.path(), &["--strategies", "baseline"]);
    // One row per replication, no covariance or EM output.
    assert_eq!(csv_rows(&dir.path().join("f1_scores.csv")).len(), 2);
    assert!(csv_rows(&dir.path().join("sigma_rmse.csv")).is_empty());
    assert!(csv_rows(&dir.path().join("beta_trace.csv")).is_empty());
}

#[test]
fn nonlinear_flag_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["experiment-nonlinear", "--seed", "1", "--out", dir.path().to_str().unwrap()];
    args.extend(SMALL);
    args.extend(["--num-datasets", "2", "--strategies", "baseline"]);
    ok(&args);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["nonlinear"], true);
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = depdag(&["learn", "--out", dir.path().to_str().unwrap(), "--data", missing.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "v0,v1\n0,1\n2,0\n").unwrap();
    let out = depdag(&["learn", "--out", dir.path().to_str().unwrap(), "--data", bad.to_str().unwrap()]);
    assert!(!out.status.success());

    let out = depdag(&["experiment", "--out", dir.path().to_str().unwrap(), "--num-datasets", "50", "--max-iters", "5"]);
    assert!(!out.status.success());
}

#[test]
fn empty_report_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let report = ExperimentReport { config: ExperimentConfig::default(), replications: Vec::new(), failures: Vec::new() };
    emit_report(&report, dir.path()).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("f1_scores.csv")).unwrap(), "rep,seed,strategy,precision,recall,f1\n");
    assert_eq!(fs::read_to_string(dir.path().join("sigma_rmse.csv")).unwrap(), "rep,seed,rmse\n");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["completed"], 0);
    assert!(summary["mean_sigma_rmse"].is_null());
}
