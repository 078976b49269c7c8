use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use depdag_core::covest::{estimate_sigma_detailed, sigma_rmse};
use depdag_core::decorr::{fit_initial_beta, initial_parents, parents_from_cpdag, run_em, ParentSets};
use depdag_core::experiment::ExperimentConfig;
use depdag_core::gaussnum::BlockCovariance;
use depdag_core::graphs::{dag_to_cpdag, f1_score, random_dag, sample_weights};
use depdag_core::pclearn::{pc_fisher_z, run_strategy, Strategy};
use depdag_core::rng::{tag, RngStreams};
use depdag_core::synth::{
    make_block_sigma, sample_links, simulate_data, simulate_nonlinear, BinaryDataset, BlockPartition, Structure,
};
use depdag_core::Matrix;
use depdag::io;
use depdag::report::{emit_report, run_experiment};
use serde_json::json;

#[derive(Parser)]
#[command(name = "depdag", version, about = "Causal structure learning on dependent binary data")]
struct Cli {
    /// Base random seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON experiment configuration; absent fields use defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a random DAG, block covariance and binary data.
    Simulate(SimulateArgs),
    /// Estimate the block covariance of the units.
    EstimateCov(EstimateArgs),
    /// Run the EM decorrelation and write the decorrelated datasets.
    Decorrelate(DecorrelateArgs),
    /// Learn a CPDAG with one strategy.
    Learn(LearnArgs),
    /// Run the simulation study.
    Experiment(Overrides),
    /// Run the simulation study with nonlinear (quadratic) links.
    ExperimentNonlinear(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// Number of DAG edges (default 2p).
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long, value_parser = parse_structure)]
    structure: Option<Structure>,
    /// Comma-separated subset of baseline,average,consensus.
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
    strategies: Option<Vec<Strategy>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_cond: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    num_datasets: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n_burn: Option<usize>,
    #[arg(long)]
    n_draws: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Use random linear/quadratic links instead of the probit model.
    #[arg(long)]
    nonlinear: bool,
}

#[derive(Args)]
struct EstimateArgs {
    /// Binary data CSV.
    #[arg(long)]
    data: PathBuf,
    /// Block sizes (JSON array).
    #[arg(long)]
    blocks: PathBuf,
    /// Coefficient matrix CSV; fitted from `--parents` (or learned) if absent.
    #[arg(long)]
    beta: Option<PathBuf>,
    /// Graph whose DAG extension gives the parent sets.
    #[arg(long)]
    parents: Option<PathBuf>,
    /// True covariance CSV, for reporting the RMSE.
    #[arg(long)]
    sigma_true: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct DecorrelateArgs {
    #[arg(long)]
    data: PathBuf,
    /// Estimated covariance CSV.
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    blocks: PathBuf,
    /// Graph whose DAG extension gives the parent sets; learned if absent.
    #[arg(long)]
    parents: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct LearnArgs {
    /// Input CSV(s): the binary data for baseline, decorrelated datasets otherwise.
    #[arg(long, num_args = 1.., required = true)]
    data: Vec<PathBuf>,
    #[arg(long, value_parser = parse_strategy, default_value = "baseline")]
    strategy: Strategy,
    /// True graph, for reporting precision/recall/F1.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    Strategy::parse(s).ok_or_else(|| format!("unknown strategy {s:?} (baseline, average, consensus)"))
}

fn parse_structure(s: &str) -> Result<Structure, String> {
    match s.to_ascii_lowercase().as_str() {
        "equal" => Ok(Structure::Equal),
        "toeplitz" => Ok(Structure::Toeplitz),
        "mixed" => Ok(Structure::Mixed),
        _ => Err(format!("unknown structure {s:?} (equal, toeplitz, mixed)")),
    }
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) {
        macro_rules! set {
            ($src:ident => $($dst:tt)+) => {
                if let Some(v) = self.$src.clone() {
                    c.$($dst)+ = v;
                }
            };
        }
        set!(n => n);
        set!(p => p);
        set!(replications => replications);
        set!(structure => sigma.structure);
        set!(strategies => strategies);
        set!(alpha => ci.alpha);
        set!(max_cond => ci.max_cond);
        set!(max_iters => em.max_iters);
        set!(num_datasets => em.num_datasets);
        set!(lambda => em.lambda);
        set!(n_burn => em.n_burn);
        set!(n_draws => em.n_draws);
        if self.edges.is_some() {
            c.num_edges = self.edges;
        }
    }
}

struct Ctx {
    config: ExperimentConfig,
    out: PathBuf,
}

impl Ctx {
    fn new(cli: &Cli, overrides: &Overrides) -> Result<Self> {
        let mut config = depdag::load_config(cli.config.as_deref())?;
        if let Some(seed) = cli.seed {
            config.seed = seed;
        }
        overrides.apply(&mut config);
        std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
        Ok(Self { config, out: cli.out.clone() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn streams(&self) -> RngStreams {
        RngStreams::new(self.config.seed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(Ctx::new(cli, &a.overrides)?, a.nonlinear),
        Command::EstimateCov(a) => estimate_cov(Ctx::new(cli, &a.overrides)?, a),
        Command::Decorrelate(a) => decorrelate(Ctx::new(cli, &a.overrides)?, a),
        Command::Learn(a) => learn(Ctx::new(cli, &a.overrides)?, a),
        Command::Experiment(o) => experiment(Ctx::new(cli, o)?, false),
        Command::ExperimentNonlinear(o) => experiment(Ctx::new(cli, o)?, true),
    }
}

fn simulate(ctx: Ctx, nonlinear: bool) -> Result<()> {
    let c = &ctx.config;
    c.validate()?;
    let streams = ctx.streams();
    let dag = random_dag(c.p, c.num_edges(), &mut streams.stream(&[tag::DAG]))?;
    let wdag = sample_weights(&dag, &mut streams.stream(&[tag::WEIGHTS]));
    let (sigma, partition) = make_block_sigma(c.n, &c.sigma, &mut streams.stream(&[tag::SIGMA]))?;
    let x = if nonlinear || c.nonlinear {
        let links = sample_links(&wdag, &mut streams.stream(&[tag::LINKS]));
        simulate_nonlinear(&wdag, &links, &sigma, c.nonlinear_threshold, &mut streams.stream(&[tag::SIMULATE]))?
    } else {
        let (x, z) = simulate_data(&wdag, &sigma, &mut streams.stream(&[tag::SIMULATE]))?;
        io::write_dataset(&ctx.path("latent.csv"), z.matrix())?;
        x
    };
    io::write_binary(&ctx.path("x.csv"), &x)?;
    io::write_text(&ctx.path("dag.txt"), &io::format_weighted_dag(&wdag))?;
    io::write_text(&ctx.path("truth_cpdag.txt"), &io::format_cpdag(&dag_to_cpdag(&wdag)))?;
    io::write_matrix(&ctx.path("sigma.csv"), &sigma.to_dense())?;
    io::write_matrix(&ctx.path("beta_true.csv"), wdag.weights())?;
    io::write_blocks(&ctx.path("blocks.json"), &partition)
}

fn parent_sets(ctx: &Ctx, x: &BinaryDataset, graph: Option<&Path>) -> Result<ParentSets> {
    Ok(match graph {
        Some(path) => parents_from_cpdag(&io::read_cpdag(path, x.p())?),
        None => initial_parents(x, &ctx.config.ci),
    })
}

fn dense_to_sigma(dense: &Matrix, partition: BlockPartition) -> Result<BlockCovariance> {
    let blocks = depdag_core::gaussnum::BlockMatrices::from_dense(partition, dense)?;
    Ok(BlockCovariance::try_from(blocks)?)
}

fn estimate_cov(ctx: Ctx, a: &EstimateArgs) -> Result<()> {
    let x = io::read_binary(&a.data)?;
    let partition = io::read_blocks(&a.blocks)?;
    let beta = match &a.beta {
        Some(path) => io::read_matrix(path)?,
        None => {
            let parents = parent_sets(&ctx, &x, a.parents.as_deref())?;
            fit_initial_beta(&x, &parents, &ctx.config.em, &ctx.streams())?
        }
    };
    let est = estimate_sigma_detailed(&x, &beta, &partition)?;
    io::write_matrix(&ctx.path("sigma_hat.csv"), &est.sigma.to_dense())?;
    let mut metrics = json!({ "pair_count": est.pair_count });
    if let Some(path) = &a.sigma_true {
        let truth = dense_to_sigma(&io::read_matrix(path)?, partition)?;
        metrics["rmse"] = json!(sigma_rmse(&est.sigma, &truth)?);
    }
    io::write_json(&ctx.path("covariance_metrics.json"), &metrics)
}

fn decorrelate(ctx: Ctx, a: &DecorrelateArgs) -> Result<()> {
    let x = io::read_binary(&a.data)?;
    let partition = io::read_blocks(&a.blocks)?;
    let sigma = dense_to_sigma(&io::read_matrix(&a.sigma)?, partition)?;
    let parents = parent_sets(&ctx, &x, a.parents.as_deref())?;
    let streams = ctx.streams();
    let beta0 = fit_initial_beta(&x, &parents, &ctx.config.em, &streams)?;
    let state = run_em(&x, &sigma, &parents, &beta0, &ctx.config.em, &streams)?;
    for (k, d) in state.datasets.iter().enumerate() {
        io::write_dataset(&ctx.path(&format!("decorrelated_{k}.csv")), d)?;
    }
    io::write_matrix(&ctx.path("beta.csv"), &state.beta)?;
    let mut w = csv::Writer::from_path(ctx.path("beta_trace.csv"))?;
    w.write_record(["iteration", "diff_norm"])?;
    for (t, d) in state.trace.iter().enumerate() {
        w.write_record([(t + 1).to_string(), d.to_string()])?;
    }
    w.flush()?;
    io::write_json(
        &ctx.path("em.json"),
        &json!({ "iterations": state.iterations, "converged": state.converged, "datasets": state.datasets.len() }),
    )?;
    if !state.converged {
        eprintln!("note: EM stopped at max_iters = {} without meeting the tolerance", ctx.config.em.max_iters);
    }
    Ok(())
}

fn learn(ctx: Ctx, a: &LearnArgs) -> Result<()> {
    let ci = &ctx.config.ci;
    ci.validate()?;
    let cpdag = match a.strategy {
        Strategy::Baseline => {
            if a.data.len() != 1 {
                bail!("baseline learns from exactly one binary dataset");
            }
            let x = io::read_binary(&a.data[0])?;
            run_strategy(&x, &[], Strategy::Baseline, ci)?
        }
        strategy => {
            let datasets = a.data.iter().map(|p| io::read_dataset(p)).collect::<Result<Vec<_>>>()?;
            if strategy == Strategy::Consensus && datasets.len() == 1 {
                pc_fisher_z(&datasets[0], ci)
            } else {
                let p = datasets[0].cols();
                run_strategy(&BinaryDataset::zeros(0, p), &datasets, strategy, ci)?
            }
        }
    };
    io::write_text(&ctx.path("cpdag.txt"), &io::format_cpdag(&cpdag))?;
    if let Some(path) = &a.truth {
        let truth = io::read_cpdag(path, cpdag.p())?;
        io::write_json(&ctx.path("learn_metrics.json"), &f1_score(&cpdag, &truth)?)?;
    }
    Ok(())
}

fn experiment(ctx: Ctx, nonlinear: bool) -> Result<()> {
    let mut config = ctx.config.clone();
    config.nonlinear |= nonlinear;
    let report = run_experiment(&config)?;
    emit_report(&report, &ctx.out)?;
    for f in &report.failures {
        eprintln!("replication {} (seed {}) failed: {}", f.rep, f.seed, f.error);
    }
    for m in report.strategy_means() {
        println!("{:<10} precision {:.4} recall {:.4} f1 {:.4}", m.strategy.name(), m.precision, m.recall, m.f1);
    }
    if report.replications.is_empty() {
        bail!("every replication failed");
    }
    Ok(())
}
