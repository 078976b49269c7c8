//! The simulation study: one replication from random DAG to scored graphs.

use alloc::format;
use alloc::vec::Vec;

use crate::covest::{estimate_sigma, sigma_rmse};
use crate::decorr::{fit_initial_beta, parents_from_cpdag, run_em, EmConfig};
use crate::error::{Error, Result};
use crate::graphs::{dag_to_cpdag, f1_score, random_dag, sample_weights, StructureMetrics};
use crate::pclearn::{pc_g_squared, run_strategy, CiParams, Strategy};
use crate::rng::{tag, RngStreams};
use crate::synth::{make_block_sigma, sample_links, simulate_data, simulate_nonlinear, NonlinearThreshold, SigmaSpec};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ExperimentConfig {
    /// Units (rows).
    pub n: usize,
    /// Variables (DAG nodes).
    pub p: usize,
    /// Edges of the random DAG; `None` means `2p`.
    pub num_edges: Option<usize>,
    pub sigma: SigmaSpec,
    /// Replication `r` uses seed `seed + r`.
    pub seed: u64,
    pub replications: usize,
    pub em: EmConfig,
    pub ci: CiParams,
    pub strategies: Vec<Strategy>,
    /// Simulate with random linear/quadratic links instead of the probit model.
    pub nonlinear: bool,
    pub nonlinear_threshold: NonlinearThreshold,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 100,
            p: 100,
            num_edges: None,
            sigma: SigmaSpec::default(),
            seed: 0,
            replications: 10,
            em: EmConfig::default(),
            ci: CiParams::default(),
            strategies: Strategy::ALL.to_vec(),
            nonlinear: false,
            nonlinear_threshold: NonlinearThreshold::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn num_edges(&self) -> usize {
        self.num_edges.unwrap_or(2 * self.p)
    }

    pub fn replication_seed(&self, rep: usize) -> u64 {
        self.seed.wrapping_add(rep as u64)
    }

    /// Whether any strategy needs the decorrelated datasets.
    pub fn needs_em(&self) -> bool {
        self.strategies.iter().any(|&s| s != Strategy::Baseline)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 || self.replications == 0 {
            return Err(Error::InvalidConfig("n, p and replications must be positive".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidConfig("no strategies selected".into()));
        }
        let max = self.p * (self.p - 1) / 2;
        if self.num_edges() > max {
            return Err(Error::TooManyEdges { requested: self.num_edges(), max });
        }
        if self.n < self.sigma.min_block {
            return Err(Error::InvalidConfig(format!(
                "n = {} is smaller than the minimum block size {}",
                self.n, self.sigma.min_block
            )));
        }
        self.em.validate()?;
        self.ci.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub metrics: StructureMetrics,
}

/// Everything measured in one replication.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicationOutcome {
    pub rep: usize,
    pub seed: u64,
    /// RMSE of `Σ̂` over within-block off-diagonal entries; `None` when EM was skipped.
    pub sigma_rmse: Option<f64>,
    pub strategies: Vec<StrategyOutcome>,
    pub em_iterations: usize,
    pub em_converged: bool,
    pub beta_trace: Vec<f64>,
}

impl ReplicationOutcome {
    pub fn f1(&self, strategy: Strategy) -> Option<f64> {
        self.strategies.iter().find(|s| s.strategy == strategy).map(|s| s.metrics.f1)
    }
}

/// Runs replication `rep` of `config`.
pub fn run_replication(config: &ExperimentConfig, rep: usize) -> Result<ReplicationOutcome> {
    config.validate()?;
    let seed = config.replication_seed(rep);
    let streams = RngStreams::new(seed);

    let dag = random_dag(config.p, config.num_edges(), &mut streams.stream(&[tag::DAG]))?;
    let wdag = sample_weights(&dag, &mut streams.stream(&[tag::WEIGHTS]));
    let (sigma_star, partition) = make_block_sigma(config.n, &config.sigma, &mut streams.stream(&[tag::SIGMA]))?;
    let x = if config.nonlinear {
        let links = sample_links(&wdag, &mut streams.stream(&[tag::LINKS]));
        let mut rng = streams.stream(&[tag::SIMULATE]);
        simulate_nonlinear(&wdag, &links, &sigma_star, config.nonlinear_threshold, &mut rng)?
    } else {
        simulate_data(&wdag, &sigma_star, &mut streams.stream(&[tag::SIMULATE]))?.0
    };
    let truth = dag_to_cpdag(&wdag);

    // The baseline graph doubles as the initial structure for EM.
    let baseline = pc_g_squared(&x, &config.ci);
    let mut outcome = ReplicationOutcome {
        rep,
        seed,
        sigma_rmse: None,
        strategies: Vec::with_capacity(config.strategies.len()),
        em_iterations: 0,
        em_converged: false,
        beta_trace: Vec::new(),
    };

    let mut datasets = Vec::new();
    if config.needs_em() {
        let parents = parents_from_cpdag(&baseline);
        let beta0 = fit_initial_beta(&x, &parents, &config.em, &streams)?;
        let sigma_hat = estimate_sigma(&x, &beta0, &partition)?;
        outcome.sigma_rmse = Some(sigma_rmse(&sigma_hat, &sigma_star)?);
        let state = run_em(&x, &sigma_hat, &parents, &beta0, &config.em, &streams)?;
        outcome.em_iterations = state.iterations;
        outcome.em_converged = state.converged;
        outcome.beta_trace = state.trace;
        datasets = state.datasets;
    }

    for &strategy in &config.strategies {
        let estimate = match strategy {
            Strategy::Baseline => baseline.clone(),
            _ => run_strategy(&x, &datasets, strategy, &config.ci)?,
        };
        outcome.strategies.push(StrategyOutcome { strategy, metrics: f1_score(&estimate, &truth)? });
    }
    Ok(outcome)
}
