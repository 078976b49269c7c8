//! Acceptance run: prints one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not hidden; the process exits non-zero on
//! a failure only when `ACCEPTANCE_STRICT=1` is set.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::f64::consts::PI;
use std::time::Instant;

use depdag::report::{run_experiment, ExperimentReport};
use depdag_core::covest::{estimate_rho, PairLikelihoodInput};
use depdag_core::experiment::ExperimentConfig;
use depdag_core::gaussnum::{bvn_cdf, gibbs_truncated_mvn, quadrant_prob, sample_truncated_normal, BlockCovariance, Side, TruncationConstraints};
use depdag_core::graphs::{dag_to_cpdag, random_dag, sample_weights, WeightedDag};
use depdag_core::pclearn::{pc_fisher_z, CiParams, CiTester, FisherZ, GSquared, Strategy};
use depdag_core::rng::RngStreams;
use depdag_core::synth::{simulate_data, BinaryDataset, BlockPartition, SigmaSpec, Structure};
use depdag_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_gaussian_kernels() -> Outcome {
    let mut worst_closed: f64 = 0.0;
    for k in -9..=9 {
        let rho = k as f64 / 10.0;
        let exact = 0.25 + rho.asin() / (2.0 * PI);
        worst_closed = worst_closed.max((bvn_cdf(0.0, 0.0, rho).unwrap() - exact).abs());
    }
    let ts = [-2.0, -0.7, 0.0, 0.4, 1.9];
    let mut worst_total: f64 = 0.0;
    for &a in &ts {
        for &b in &ts {
            for k in -4..=4 {
                let rho = k as f64 * 0.22;
                let total: f64 = [(0, 0), (0, 1), (1, 0), (1, 1)]
                    .iter()
                    .map(|&pair| quadrant_prob(pair, (a, b), rho).unwrap())
                    .sum();
                worst_total = worst_total.max((total - 1.0).abs());
            }
        }
    }
    outcome(
        worst_closed <= 1e-7 && worst_total <= 1e-9,
        format!("max closed-form error {worst_closed:.2e} (≤ 1e-7), max quadrant-sum error {worst_total:.2e} (≤ 1e-9)"),
    )
}

fn c2_truncated_sampling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 100_000;
    let half = (0..draws).map(|_| sample_truncated_normal(0.0, 1.0, Side::Greater, 0.0, &mut rng)).sum::<f64>()
        / draws as f64;
    let half_err = (half - (2.0 / PI).sqrt()).abs();

    let sigma = Matrix::from_rows(&[&[1.0, 0.6], &[0.6, 1.0]]);
    let c = TruncationConstraints::from_bits(vec![0.0, 0.0], &[1, 1]).unwrap();
    let gibbs = gibbs_truncated_mvn(&sigma, &c, 500, 100_000, &mut rng).unwrap();
    // Rejection oracle: correlated pairs built by hand, kept when both positive.
    let (mut acc, mut kept) = ([0.0; 2], 0usize);
    let s = (1.0f64 - 0.36).sqrt();
    while kept < 100_000 {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let (e1, e2) = (z1, 0.6 * z1 + s * z2);
        if e1 > 0.0 && e2 > 0.0 {
            acc[0] += e1;
            acc[1] += e2;
            kept += 1;
        }
    }
    let gibbs_err = (0..2).map(|i| (gibbs[i] - acc[i] / kept as f64).abs()).fold(0.0, f64::max);
    outcome(
        half_err <= 0.01 && gibbs_err <= 0.05,
        format!("half-normal mean {half:.4} (|err| {half_err:.4} ≤ 0.01), Gibbs vs rejection max diff {gibbs_err:.4} (≤ 0.05)"),
    )
}

fn c3_rho_recovery() -> Outcome {
    let p = 1000;
    let mut hits = 0;
    let mut errs = Vec::new();
    for seed in 0..10u64 {
        let streams = RngStreams::new(3000 + seed);
        let dag = random_dag(p, 2 * p, &mut streams.stream(&[1])).unwrap();
        let wdag = sample_weights(&dag, &mut streams.stream(&[2]));
        let block = Matrix::from_rows(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let sigma = BlockCovariance::new(BlockPartition::from_sizes(vec![2]).unwrap(), vec![block]).unwrap();
        let (x, _) = simulate_data(&wdag, &sigma, &mut streams.stream(&[3])).unwrap();
        let eta = x.linear_predictor(wdag.weights()).unwrap();
        let row = |i: usize| (0..p).map(|j| x.get(i, j)).collect::<Vec<_>>();
        let thr = |i: usize| (0..p).map(|j| -eta[(i, j)]).collect::<Vec<_>>();
        let (xa, xb, ta, tb) = (row(0), row(1), thr(0), thr(1));
        let rho = estimate_rho(&PairLikelihoodInput::new(&xa, &xb, &ta, &tb).unwrap()).unwrap();
        errs.push(format!("{:.3}", rho - 0.5));
        hits += usize::from((rho - 0.5).abs() <= 0.08);
    }
    outcome(hits >= 8, format!("|ρ̂ − 0.5| ≤ 0.08 in {hits}/10 seeds (need ≥ 8); errors [{}]", errs.join(", ")))
}

fn c4_rmse(mixed: &ExperimentReport) -> Outcome {
    let rmses: Vec<f64> = mixed.replications.iter().filter(|r| r.outcome.rep < 5).filter_map(|r| r.outcome.sigma_rmse).collect();
    let mean = rmses.iter().sum::<f64>() / rmses.len() as f64;
    let list: Vec<String> = rmses.iter().map(|v| format!("{v:.3}")).collect();
    outcome(rmses.len() == 5 && mean <= 0.15, format!("mean RMSE over 5 seeds {mean:.4} (≤ 0.15); per seed [{}]", list.join(", ")))
}

fn c5_em_trace(mixed: &ExperimentReport) -> Outcome {
    let mut ok = 0;
    let mut ratios = Vec::new();
    for r in &mixed.replications {
        let t = &r.outcome.beta_trace;
        let Some(&first) = t.first() else { continue };
        // Value at iteration 10, or the last one if EM converged earlier.
        let at10 = t[t.len().min(10) - 1];
        let ratio = at10 / first;
        ratios.push(format!("{ratio:.2}"));
        ok += usize::from(ratio < 0.2);
    }
    outcome(ok >= 8, format!("trace(10)/trace(1) < 0.2 in {ok}/{} seeds (need ≥ 8); ratios [{}]", ratios.len(), ratios.join(", ")))
}

fn f1_pair(report: &ExperimentReport) -> (f64, f64) {
    (report.mean_f1(Strategy::Baseline).unwrap(), report.mean_f1(Strategy::Consensus).unwrap())
}

fn c6_end_to_end(mixed: &ExperimentReport) -> Outcome {
    let (base, cons) = f1_pair(mixed);
    let avg = mixed.mean_f1(Strategy::Average).unwrap();
    let gain = cons / base - 1.0;
    let band = |v: f64| (0.15..=0.40).contains(&v);
    outcome(
        mixed.replications.len() == 10 && cons > base && gain >= 0.05 && band(base) && band(cons),
        format!(
            "baseline {base:.4}, consensus {cons:.4} (average {avg:.4}); relative gain {:.1}% (≥ 5%); \
             baseline in [0.15, 0.40]: {}, consensus in [0.15, 0.40]: {}",
            100.0 * gain,
            band(base),
            band(cons)
        ),
    )
}

fn c7_structure_ordering(equal: &ExperimentReport, toeplitz: &ExperimentReport) -> Outcome {
    let (eb, ec) = f1_pair(equal);
    let (tb, tc) = f1_pair(toeplitz);
    let (ge, gt) = (ec / eb - 1.0, tc / tb - 1.0);
    outcome(
        ge >= gt,
        format!(
            "Equal gain {:.1}% (baseline {eb:.4} → consensus {ec:.4}) vs Toeplitz gain {:.1}% ({tb:.4} → {tc:.4})",
            100.0 * ge,
            100.0 * gt
        ),
    )
}

fn c8_oracle_suites() -> Outcome {
    // (a) CPDAG construction against brute-force equivalence classes.
    let mut mismatches = 0;
    let mut checked = 0;
    for p in 1..=4 {
        for (edges, directed, undirected) in support::brute_force_cpdags(p) {
            let c = dag_to_cpdag(&WeightedDag::from_edges(p, &edges).unwrap());
            checked += 1;
            mismatches += usize::from(c.directed() != &directed || c.undirected() != &undirected);
        }
    }
    // (b) PC on iid Gaussian chain and collider, p = 5, n = 5000.
    let chain = WeightedDag::from_weighted_edges(5, &[(0, 1, 0.8), (1, 2, -0.7), (2, 3, 0.75), (3, 4, 0.6)]).unwrap();
    let collider =
        WeightedDag::from_weighted_edges(5, &[(0, 2, 0.8), (1, 2, 0.7), (2, 3, 0.75), (3, 4, -0.6)]).unwrap();
    let recovered = |dag: &WeightedDag, offset: u64| {
        let truth = dag_to_cpdag(dag);
        (0..10)
            .filter(|&s| {
                let data = support::gaussian_sem(dag, 5000, &mut ChaCha8Rng::seed_from_u64(offset + s));
                pc_fisher_z(&data, &CiParams::default()) == truth
            })
            .count()
    };
    let (rc, rv) = (recovered(&chain, 8000), recovered(&collider, 8100));
    // (c) Null calibration of both tests at 5%.
    let sims = 20_000u64;
    let n = 5000;
    let fz = (0..sims)
        .filter(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(80_000 + s);
            let data = Matrix::from_fn(n, 2, |_, _| StandardNormal.sample(&mut rng));
            FisherZ::new(&data).p_value(0, 1, &[]) < 0.05
        })
        .count() as f64
        / sims as f64;
    let g2 = (0..sims)
        .filter(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(180_000 + s);
            let bits = (0..n * 2).map(|_| u8::from(rng.random_bool(0.5))).collect();
            let x = BinaryDataset::from_col_major(n, 2, bits).unwrap();
            GSquared::new(&x).p_value(0, 1, &[]) < 0.05
        })
        .count() as f64
        / sims as f64;
    let calibrated = |r: f64| (r - 0.05).abs() <= 0.01;
    outcome(
        mismatches == 0 && rc >= 9 && rv >= 9 && calibrated(fz) && calibrated(g2),
        format!(
            "CPDAG oracle {}/{checked} DAGs agree; PC exact recovery chain {rc}/10, collider {rv}/10 (≥ 9); \
             null rejection Fisher-z {:.2}%, G² {:.2}% (5 ± 1%)",
            checked - mismatches,
            100.0 * fz,
            100.0 * g2
        ),
    )
}

fn c9_whitening() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut sizes = Vec::new();
    for size in [1, 2, 4, 8, 12, 15] {
        let block = support::random_correlation(size, &mut rng);
        worst = worst.max(support::whitening_error(&block, 100_000, &mut rng));
        sizes.push(size.to_string());
    }
    outcome(worst <= 0.02, format!("max |cov(Wε) − I| entry {worst:.4} (≤ 0.02) over block sizes [{}]", sizes.join(", ")))
}

fn study(structure: Structure) -> ExperimentReport {
    let config = ExperimentConfig {
        sigma: SigmaSpec::with_structure(structure),
        replications: 10,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&config).expect("valid configuration");
    for f in &report.failures {
        println!("  note: {structure:?} replication {} failed: {}", f.rep, f.error);
    }
    report
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {id} [{name}]: {} — {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o, secs));
    };

    timed(1, "gaussian kernels", &mut c1_gaussian_kernels);
    timed(2, "truncated sampling", &mut c2_truncated_sampling);
    timed(3, "rho recovery", &mut c3_rho_recovery);

    let start = Instant::now();
    let mixed = study(Structure::Mixed);
    println!("  (mixed study: {:.0}s)", start.elapsed().as_secs_f64());
    timed(4, "covariance RMSE", &mut || c4_rmse(&mixed));
    timed(5, "EM trace", &mut || c5_em_trace(&mixed));
    timed(6, "end-to-end improvement", &mut || c6_end_to_end(&mixed));

    let start = Instant::now();
    let equal = study(Structure::Equal);
    let toeplitz = study(Structure::Toeplitz);
    println!("  (equal + toeplitz studies: {:.0}s)", start.elapsed().as_secs_f64());
    timed(7, "equal vs toeplitz gain", &mut || c7_structure_ordering(&equal, &toeplitz));
    timed(8, "oracle suites", &mut c8_oracle_suites);
    timed(9, "whitening", &mut c9_whitening);

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria passed{}", results.len() - failed.len(), results.len(), if failed.is_empty() {
        String::new()
    } else {
        format!("; failing: {failed:?}")
    });
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
