use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use depdag_core::experiment::{run_replication, ExperimentConfig, ReplicationOutcome};
use depdag_core::pclearn::Strategy;
use rayon::prelude::*;
use serde::Serialize;

use crate::io::write_json;

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationRecord {
    #[serde(flatten)]
    pub outcome: ReplicationOutcome,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationFailure {
    pub rep: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyMeans {
    pub strategy: Strategy,
    pub replications: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub replications: Vec<ReplicationRecord>,
    pub failures: Vec<ReplicationFailure>,
}

impl ExperimentReport {
    pub fn strategy_means(&self) -> Vec<StrategyMeans> {
        self.config
            .strategies
            .iter()
            .map(|&strategy| {
                let rows: Vec<_> = self
                    .replications
                    .iter()
                    .flat_map(|r| r.outcome.strategies.iter())
                    .filter(|s| s.strategy == strategy)
                    .map(|s| s.metrics)
                    .collect();
                let mean = |f: fn(&depdag_core::graphs::StructureMetrics) -> f64| {
                    mean(&rows.iter().map(f).collect::<Vec<_>>())
                };
                StrategyMeans {
                    strategy,
                    replications: rows.len(),
                    precision: mean(|m| m.precision),
                    recall: mean(|m| m.recall),
                    f1: mean(|m| m.f1),
                }
            })
            .collect()
    }

    pub fn mean_f1(&self, strategy: Strategy) -> Option<f64> {
        self.strategy_means().into_iter().find(|m| m.strategy == strategy).map(|m| m.f1)
    }

    pub fn mean_sigma_rmse(&self) -> f64 {
        mean(&self.replications.iter().filter_map(|r| r.outcome.sigma_rmse).collect::<Vec<_>>())
    }
}

/// Mean of `xs`; NaN when empty.
fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Runs every replication (in parallel). Failing replications are recorded
/// and do not stop the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate().context("invalid experiment configuration")?;
    let results: Vec<_> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let start = Instant::now();
            let out = run_replication(config, rep);
            (rep, out, start.elapsed().as_secs_f64())
        })
        .collect();
    let mut report = ExperimentReport { config: config.clone(), replications: Vec::new(), failures: Vec::new() };
    for (rep, out, secs) in results {
        match out {
            Ok(outcome) => report.replications.push(ReplicationRecord { outcome, wall_time_secs: secs }),
            Err(e) => report.failures.push(ReplicationFailure {
                rep,
                seed: config.replication_seed(rep),
                error: e.to_string(),
            }),
        }
    }
    Ok(report)
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    nonlinear: bool,
    completed: usize,
    failures: &'a [ReplicationFailure],
    mean_sigma_rmse: Option<f64>,
    strategies: Vec<StrategyMeans>,
    mean_em_iterations: Option<f64>,
    wall_time_secs: Vec<f64>,
}

/// Writes `f1_scores.csv`, `sigma_rmse.csv`, `beta_trace.csv` and
/// `summary.json` into `dir`, creating it if needed.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let open = |name: &str| {
        let path = dir.join(name);
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))
    };

    let mut f1 = open("f1_scores.csv")?;
    f1.write_record(["rep", "seed", "strategy", "precision", "recall", "f1"])?;
    let mut rmse = open("sigma_rmse.csv")?;
    rmse.write_record(["rep", "seed", "rmse"])?;
    let mut trace = open("beta_trace.csv")?;
    trace.write_record(["rep", "iteration", "diff_norm"])?;
    for r in &report.replications {
        let o = &r.outcome;
        for s in &o.strategies {
            let m = s.metrics;
            f1.write_record([
                o.rep.to_string(),
                o.seed.to_string(),
                s.strategy.name().to_string(),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f1.to_string(),
            ])?;
        }
        if let Some(v) = o.sigma_rmse {
            rmse.write_record([o.rep.to_string(), o.seed.to_string(), v.to_string()])?;
        }
        for (t, d) in o.beta_trace.iter().enumerate() {
            trace.write_record([o.rep.to_string(), (t + 1).to_string(), d.to_string()])?;
        }
    }
    for w in [&mut f1, &mut rmse, &mut trace] {
        w.flush().context("flushing report CSV")?;
    }

    let rmses: Vec<f64> = report.replications.iter().filter_map(|r| r.outcome.sigma_rmse).collect();
    let em_runs: Vec<f64> =
        report.replications.iter().filter(|r| r.outcome.em_iterations > 0).map(|r| r.outcome.em_iterations as f64).collect();
    let summary = Summary {
        config: &report.config,
        nonlinear: report.config.nonlinear,
        completed: report.replications.len(),
        failures: &report.failures,
        mean_sigma_rmse: (!rmses.is_empty()).then(|| mean(&rmses)),
        strategies: report.strategy_means(),
        mean_em_iterations: (!em_runs.is_empty()).then(|| mean(&em_runs)),
        wall_time_secs: report.replications.iter().map(|r| r.wall_time_secs).collect(),
    };
    write_json(&dir.join("summary.json"), &summary)
}
