//! Experiment CLI for replicable tabular-MDP estimation.
//!
//! Exit codes: 0 on success, 2 on configuration errors (bad flags,
//! unparsable files, invalid parameters), 3 on experiment failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use repliq::coins::acceptance_curve;
use repliq::divergence::RenyiOrder;
use repliq::error::Error;
use repliq::harness::{paired_run, single_run, wilson_interval, EstimatorKind, PairedConfig};
use repliq::mdp::{exact_value_iteration, greedy_policy, v_from_q, Policy, TabularMdp};
use repliq::seed::SeedStream;
use repliq::suite::{run_suite, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "repliq",
    about = "Replicable Q-function and policy estimation experiments on tabular MDPs",
    version
)]
struct Cli {
    /// Root seed for all randomness; every record persists it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// MDP file (JSON schema: num_states, actions, transition, reward,
    /// gamma, initial_state).
    #[arg(long, global = true)]
    mdp: Option<PathBuf>,

    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum QMethod {
    /// Offset-grid rounding (exact replicability).
    Replicable,
    /// Gaussian mechanism (TV indistinguishability).
    Tv,
    /// Gaussian mechanism + shared-randomness coupling.
    Coupled,
    /// Plain plug-in oracle (no stability).
    Naive,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PolicyMethod {
    Replicable,
    Tv,
    /// Soft-max policy (approximate replicability).
    Approx,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CoinMode {
    /// Acceptance curve of the naive midpoint classifier.
    Curve,
    /// Paired inconsistency across a sweep of per-coin budgets.
    Sweep,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PairedEstimator {
    Exact,
    NaiveQ,
    ReplicableQ,
    ReplicablePolicy,
    TvQ,
    TvPolicy,
    CoupledQ,
    ApproxPolicy,
    Coupling,
}

#[derive(Subcommand)]
enum Command {
    /// Exactly solve an MDP: Q*, V*, and the greedy policy.
    Solve {
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Estimate an optimal Q-function from generator samples.
    EstimateQ {
        #[arg(long, value_enum)]
        method: QMethod,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Truncation box padding in sigmas (coupled method).
        #[arg(long)]
        box_sigmas: Option<f64>,
        /// Atom budget override (coupled method).
        #[arg(long)]
        atoms: Option<usize>,
    },
    /// Estimate an optimal policy from generator samples.
    EstimatePolicy {
        #[arg(long, value_enum)]
        method: PolicyMethod,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Divergence threshold rho1 (approx method).
        #[arg(long, default_value_t = 0.5)]
        rho1: f64,
        /// Failure rate rho2 (approx method).
        #[arg(long, default_value_t = 0.1)]
        rho2: f64,
        /// Renyi order: a number >= 1 or "inf" (approx method).
        #[arg(long, default_value = "2")]
        alpha: String,
    },
    /// Replicably evaluate an explicit policy's Q-function.
    EvaluatePolicy {
        /// Policy JSON file ({"kind": "deterministic", "actions": [..]}
        /// or {"kind": "stochastic", "rows": [[..]]}).
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Coin-identification diagnostics; emits per-grid-point CSV.
    Coin {
        #[arg(long, value_enum, default_value_t = CoinMode::Curve)]
        mode: CoinMode,
        #[arg(long, default_value_t = 0.9)]
        q: f64,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        /// Flips per coin (curve mode).
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 2000)]
        trials: u32,
        #[arg(long, default_value_t = 0.0)]
        grid_lo: f64,
        #[arg(long, default_value_t = 1.0)]
        grid_hi: f64,
        #[arg(long, default_value_t = 11)]
        grid_points: usize,
        /// Comma-separated per-coin budgets (sweep mode).
        #[arg(long, default_value = "100,1000,10000")]
        ms: String,
    },
    /// Paired-run replicability measurement.
    Paired {
        #[arg(long, value_enum)]
        estimator: PairedEstimator,
        #[arg(long, default_value_t = 200)]
        trials: u32,
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        rho1: f64,
        #[arg(long, default_value_t = 0.1)]
        rho2: f64,
        #[arg(long, default_value = "2")]
        alpha: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Output dimension of the pure coupling diagnostic.
        #[arg(long, default_value_t = 1)]
        coupling_dim: usize,
        /// Noise scale of the coupling diagnostic.
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        /// Target TV distance of the coupling diagnostic.
        #[arg(long, default_value_t = 0.2)]
        tv: f64,
        #[arg(long)]
        box_sigmas: Option<f64>,
        /// Atom budget override for coupling paths.
        #[arg(long)]
        atoms: Option<usize>,
    },
    /// Run an experiment suite from a JSON config file.
    Suite { config: PathBuf },
}

fn parse_alpha(text: &str) -> Result<RenyiOrder, Error> {
    if text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinity") {
        return Ok(RenyiOrder::Infinity);
    }
    let a: f64 = text
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse Renyi order '{text}'")))?;
    if a < 1.0 {
        return Err(Error::Config(format!("Renyi order must be >= 1, got {a}")));
    }
    Ok(RenyiOrder::Alpha(a))
}

fn load_mdp(path: &Option<PathBuf>) -> Result<TabularMdp, Error> {
    let path = path
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --mdp <file>".to_string()))?;
    TabularMdp::from_json(&fs::read_to_string(path)?)
}

fn write_output(out: &Option<PathBuf>, file_name: &str, text: &str) -> Result<(), Error> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file_name), text)?;
            Ok(())
        }
        None => {
            if text.ends_with('\n') {
                print!("{text}");
            } else {
                println!("{text}");
            }
            Ok(())
        }
    }
}

fn q_table_csv(mdp: &TabularMdp, values: &[f64]) -> String {
    let mut text = String::from("state,action,q\n");
    for pair in 0..mdp.n_pairs() {
        let (s, i) = mdp.pair_location(pair);
        text.push_str(&format!("{s},{},{}\n", mdp.actions(s)[i], values[pair]));
    }
    text
}

fn report_csv(report: &repliq::harness::ReplicabilityReport) -> String {
    format!(
        "estimator,notion,trials,agreements,agreement_rate,wilson_low,wilson_high,accuracy_rate,samples_per_run,samples_total,root_seed\n{},{},{},{},{},{},{},{},{},{},{}\n",
        report.estimator,
        report.notion,
        report.trials,
        report.agreements,
        report.agreement_rate,
        report.wilson_low,
        report.wilson_high,
        report.accuracy_rate,
        report.samples_per_run,
        report.samples_total,
        report.root_seed,
    )
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Solve { tol } => {
            let mdp = load_mdp(&cli.mdp)?;
            let q = exact_value_iteration(&mdp, *tol)?;
            let text = match cli.format {
                Format::Csv => q_table_csv(&mdp, &q.values),
                Format::Json => {
                    let v = v_from_q(&mdp, &q);
                    let pi = greedy_policy(&mdp, &q)?;
                    serde_json::to_string_pretty(&serde_json::json!({
                        "q": q.values,
                        "v": v.values,
                        "greedy_policy": pi,
                        "tol": tol,
                    }))?
                }
            };
            let ext = if cli.format == Format::Csv {
                "csv"
            } else {
                "json"
            };
            write_output(&cli.out, &format!("solve.{ext}"), &text)
        }
        Command::EstimateQ {
            method,
            epsilon,
            rho,
            delta,
            box_sigmas,
            atoms,
        } => {
            let mdp = load_mdp(&cli.mdp)?;
            let kind = match method {
                QMethod::Replicable => EstimatorKind::ReplicableQ {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                },
                QMethod::Tv => EstimatorKind::TvIndQ {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                },
                QMethod::Coupled => EstimatorKind::CoupledQ {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                    box_sigmas: *box_sigmas,
                    atom_budget: *atoms,
                },
                QMethod::Naive => EstimatorKind::NaiveQ {
                    epsilon0: *epsilon,
                    delta0: *delta,
                },
            };
            let result = single_run(&kind, &mdp, cli.seed)?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&result)?,
                Format::Csv => {
                    let values: Vec<f64> = serde_json::from_value(
                        result.output.get("q").cloned().unwrap_or_default(),
                    )?;
                    q_table_csv(&mdp, &values)
                }
            };
            let ext = if cli.format == Format::Csv {
                "csv"
            } else {
                "json"
            };
            write_output(&cli.out, &format!("estimate-q.{ext}"), &text)
        }
        Command::EstimatePolicy {
            method,
            epsilon,
            rho,
            delta,
            rho1,
            rho2,
            alpha,
        } => {
            let mdp = load_mdp(&cli.mdp)?;
            let kind = match method {
                PolicyMethod::Replicable => EstimatorKind::ReplicablePolicy {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                },
                PolicyMethod::Tv => EstimatorKind::TvIndPolicy {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                },
                PolicyMethod::Approx => EstimatorKind::ApproxPolicy {
                    epsilon: *epsilon,
                    rho1: *rho1,
                    rho2: *rho2,
                    delta: *delta,
                    alpha: parse_alpha(alpha)?,
                },
            };
            let result = single_run(&kind, &mdp, cli.seed)?;
            write_output(
                &cli.out,
                "estimate-policy.json",
                &serde_json::to_string_pretty(&result)?,
            )
        }
        Command::EvaluatePolicy {
            policy,
            epsilon,
            rho,
            delta,
        } => {
            let mdp = load_mdp(&cli.mdp)?;
            let policy: Policy = serde_json::from_str(&fs::read_to_string(policy)?)?;
            policy.validate(&mdp)?;
            let kind = EstimatorKind::PolicyEval {
                epsilon: *epsilon,
                rho: *rho,
                delta: *delta,
                policy,
            };
            let result = single_run(&kind, &mdp, cli.seed)?;
            write_output(
                &cli.out,
                "evaluate-policy.json",
                &serde_json::to_string_pretty(&result)?,
            )
        }
        Command::Coin {
            mode,
            q,
            epsilon,
            m,
            trials,
            grid_lo,
            grid_hi,
            grid_points,
            ms,
        } => {
            if !(*q < 1.0 && q - epsilon > 0.5) {
                return Err(Error::Config(format!(
                    "need q - eps in (1/2, 1): q = {q}, eps = {epsilon}"
                )));
            }
            match mode {
                CoinMode::Curve => {
                    if *grid_points < 2 || !(grid_hi > grid_lo) {
                        return Err(Error::Config(
                            "need grid_points >= 2 and grid_hi > grid_lo".into(),
                        ));
                    }
                    let grid: Vec<f64> = (0..*grid_points)
                        .map(|i| {
                            grid_lo + (grid_hi - grid_lo) * i as f64 / (*grid_points as f64 - 1.0)
                        })
                        .collect();
                    let threshold = q - epsilon / 2.0;
                    let classify = move |flips: &[u8]| {
                        let mean =
                            flips.iter().map(|&f| f as f64).sum::<f64>() / flips.len() as f64;
                        mean > threshold
                    };
                    let external = SeedStream::from_root(cli.seed).child("coin-curve");
                    let curve = acceptance_curve(classify, &grid, *m, *trials, &external)?;
                    let mut text = String::from("p,acc_estimate,ci_low,ci_high,m,trials,seed\n");
                    for pt in &curve.points {
                        text.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            pt.p, pt.acc, pt.ci_low, pt.ci_high, m, trials, cli.seed
                        ));
                    }
                    write_output(&cli.out, "coin-curve.csv", &text)
                }
                CoinMode::Sweep => {
                    let budgets: Result<Vec<usize>, _> =
                        ms.split(',').map(|s| s.trim().parse::<usize>()).collect();
                    let budgets = budgets
                        .map_err(|_| Error::Config(format!("cannot parse budgets '{ms}'")))?;
                    let root = SeedStream::from_root(cli.seed).child("coin-sweep");
                    let mut text = String::from("m,inconsistency,ci_low,ci_high,trials,seed\n");
                    for (i, &mm) in budgets.iter().enumerate() {
                        let rate = repliq::coins::naive_paired_inconsistency(
                            *q,
                            *epsilon,
                            mm,
                            *trials,
                            &root.child_idx("m", i as u64),
                        );
                        let differs = (rate * f64::from(*trials)).round() as u32;
                        let (lo, hi) = wilson_interval(differs, *trials);
                        text.push_str(&format!("{mm},{rate},{lo},{hi},{trials},{}\n", cli.seed));
                    }
                    write_output(&cli.out, "coin-sweep.csv", &text)
                }
            }
        }
        Command::Paired {
            estimator,
            trials,
            epsilon,
            rho,
            delta,
            rho1,
            rho2,
            alpha,
            tol,
            coupling_dim,
            sigma,
            tv,
            box_sigmas,
            atoms,
        } => {
            let kind = match estimator {
                PairedEstimator::Exact => EstimatorKind::ExactSolve { tol: *tol },
                PairedEstimator::NaiveQ => EstimatorKind::NaiveQ {
                    epsilon0: *epsilon,
                    delta0: *delta,
                },
                PairedEstimator::ReplicableQ => EstimatorKind::ReplicableQ {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                },
                PairedEstimator::ReplicablePolicy => EstimatorKind::ReplicablePolicy {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                },
                PairedEstimator::TvQ => EstimatorKind::TvIndQ {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                },
                PairedEstimator::TvPolicy => EstimatorKind::TvIndPolicy {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                },
                PairedEstimator::CoupledQ => EstimatorKind::CoupledQ {
                    epsilon: *epsilon,
                    rho: *rho,
                    delta: *delta,
                    box_sigmas: *box_sigmas,
                    atom_budget: *atoms,
                },
                PairedEstimator::ApproxPolicy => EstimatorKind::ApproxPolicy {
                    epsilon: *epsilon,
                    rho1: *rho1,
                    rho2: *rho2,
                    delta: *delta,
                    alpha: parse_alpha(alpha)?,
                },
                PairedEstimator::Coupling => EstimatorKind::GaussianCoupling {
                    dim: *coupling_dim,
                    sigma: *sigma,
                    tv: *tv,
                    box_sigmas: *box_sigmas,
                    atom_budget: *atoms,
                },
            };
            let mdp = if kind.needs_mdp() {
                Some(load_mdp(&cli.mdp)?)
            } else {
                None
            };
            let config = PairedConfig {
                estimator: kind,
                trials: *trials,
                root_seed: cli.seed,
            };
            let report = paired_run(&config, mdp.as_ref())?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report)?,
                Format::Csv => report_csv(&report),
            };
            let ext = if cli.format == Format::Csv {
                "csv"
            } else {
                "json"
            };
            write_output(&cli.out, &format!("paired.{ext}"), &text)
        }
        Command::Suite { config } => {
            let parsed = SuiteConfig::from_json(&fs::read_to_string(config)?)?;
            let out_dir = cli
                .out
                .clone()
                .ok_or_else(|| Error::Config("suite needs --out <dir>".to_string()))?;
            let outcome = run_suite(&parsed, &out_dir)?;
            eprintln!(
                "suite: {} experiments, {} failed; summary at {}",
                parsed.experiments.len(),
                outcome.failures.len(),
                outcome.summary_csv.display()
            );
            for (name, message) in &outcome.failures {
                eprintln!("  {name}: {message}");
            }
            if outcome.failures.is_empty() {
                Ok(())
            } else {
                Err(Error::Experiment {
                    name: outcome.failures[0].0.clone(),
                    message: outcome.failures[0].1.clone(),
                })
            }
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidMdp(_)
        | Error::ShapeMismatch(_)
        | Error::Json(_)
        | Error::Io(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
