//! Experiment suites: a versioned JSON config in, run records and tidy
//! CSV out.
//!
//! Every experiment is deterministic in `(config, seed)`. The summary
//! table (`summary.csv`) and per-experiment CSVs contain only
//! deterministic columns, so re-running a suite with the same seed
//! reproduces them byte for byte. Wall-clock timings go to a separate
//! `timings.csv`, and full run records (with timestamps) are appended
//! under `records/`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::coins::{acceptance_curve, naive_paired_inconsistency};
use crate::error::{Error, Result};
use crate::family::{build_lower_bound_mdp, LowerBoundFamilySpec};
use crate::harness::{paired_run, wilson_interval, EstimatorKind, PairedConfig};
use crate::mdp::{exact_value_iteration, greedy_policy, random_mdp, v_from_q, TabularMdp};
use crate::seed::SeedStream;
use crate::sq::SqParams;

/// Where an experiment's MDP comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum MdpSource {
    /// Load from a JSON file in the canonical schema.
    File { path: String },
    /// The MDP document inline in the config.
    Inline { mdp: serde_json::Value },
    /// Generate a hard-family instance.
    LowerBound {
        k: usize,
        l: usize,
        gamma: f64,
        p: Vec<Vec<f64>>,
    },
    /// A random dense MDP derived from the suite seed.
    Random {
        states: usize,
        actions: usize,
        gamma: f64,
    },
}

impl MdpSource {
    pub fn load(&self, suite_seed: u64, experiment: &str) -> Result<TabularMdp> {
        match self {
            MdpSource::File { path } => TabularMdp::from_json(&fs::read_to_string(path)?),
            MdpSource::Inline { mdp } => TabularMdp::from_json(&serde_json::to_string(mdp)?),
            MdpSource::LowerBound { k, l, gamma, p } => {
                let spec = LowerBoundFamilySpec::new(*k, *l, *gamma, p.clone())?;
                build_lower_bound_mdp(&spec)
            }
            MdpSource::Random {
                states,
                actions,
                gamma,
            } => {
                let mut rng = SeedStream::from_root(suite_seed)
                    .child("mdp-gen")
                    .child(experiment)
                    .rng();
                Ok(random_mdp(*states, *actions, *gamma, &mut rng))
            }
        }
    }
}

/// One experiment in a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    /// Paired-run replicability measurement.
    Paired {
        name: String,
        #[serde(default)]
        mdp: Option<MdpSource>,
        estimator: EstimatorKind,
        trials: u32,
    },
    /// Exact solve of an MDP; emits Q, V, and the greedy policy.
    Solve {
        name: String,
        mdp: MdpSource,
        tol: f64,
    },
    /// Acceptance curve of the naive midpoint classifier; emits one
    /// CSV row per grid point.
    CoinCurve {
        name: String,
        q: f64,
        epsilon: f64,
        m: usize,
        trials: u32,
        grid: Vec<f64>,
    },
    /// Paired inconsistency of the naive classifier across a sweep of
    /// per-coin budgets.
    CoinSweep {
        name: String,
        q: f64,
        epsilon: f64,
        ms: Vec<usize>,
        trials: u32,
    },
    /// Sample budgets of the replicable mean oracle across a rho sweep.
    MeanScaling {
        name: String,
        epsilon: f64,
        rhos: Vec<f64>,
        delta: f64,
    },
}

impl Experiment {
    pub fn name(&self) -> &str {
        match self {
            Experiment::Paired { name, .. }
            | Experiment::Solve { name, .. }
            | Experiment::CoinCurve { name, .. }
            | Experiment::CoinSweep { name, .. }
            | Experiment::MeanScaling { name, .. } => name,
        }
    }
}

/// A versioned suite configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub version: u32,
    pub seed: u64,
    pub experiments: Vec<Experiment>,
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SuiteConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config does not parse: {e}")))?;
        if config.version != 1 {
            return Err(Error::Config(format!(
                "unsupported config version {}",
                config.version
            )));
        }
        let mut names: Vec<&str> = config.experiments.iter().map(|e| e.name()).collect();
        for name in &names {
            if name.is_empty()
                || !name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return Err(Error::Config(format!(
                    "experiment name '{name}' must be non-empty [A-Za-z0-9_-] (it names output files)"
                )));
            }
        }
        names.sort_unstable();
        names.dedup();
        if names.len() != config.experiments.len() {
            return Err(Error::Config("experiment names must be unique".to_string()));
        }
        Ok(config)
    }
}

/// An append-only record of one executed experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    pub command: String,
    pub config: serde_json::Value,
    pub root_seed: u64,
    pub seed_paths: Vec<String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub wall_ms: u64,
    /// Total generator samples the experiment drew.
    pub samples_total: u64,
    pub output: serde_json::Value,
}

/// One row of the deterministic summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub estimator: String,
    pub n_pairs: Option<usize>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
    pub samples_total: u64,
    pub agreement_rate: Option<f64>,
    pub accuracy_rate: Option<f64>,
}

/// Everything a suite run produces.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub rows: Vec<SummaryRow>,
    /// `(experiment, error message)` of experiments that failed;
    /// failures do not abort the remaining experiments.
    pub failures: Vec<(String, String)>,
    pub summary_csv: PathBuf,
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn summary_csv_text(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "experiment,estimator,n_pairs,gamma,epsilon,rho,delta,samples_total,agreement_rate,accuracy_rate\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.estimator,
            fmt_opt_usize(r.n_pairs),
            fmt_opt_f64(r.gamma),
            fmt_opt_f64(r.epsilon),
            fmt_opt_f64(r.rho),
            fmt_opt_f64(r.delta),
            r.samples_total,
            fmt_opt_f64(r.agreement_rate),
            fmt_opt_f64(r.accuracy_rate),
        ));
    }
    out
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

struct ExperimentResult {
    row: SummaryRow,
    output: serde_json::Value,
    /// Extra deterministic CSV emitted next to the summary.
    csv: Option<String>,
    seed_paths: Vec<String>,
}

fn estimator_fields(kind: &EstimatorKind) -> (Option<f64>, Option<f64>, Option<f64>) {
    match kind {
        EstimatorKind::ExactSolve { tol } => (Some(*tol), None, None),
        EstimatorKind::NaiveQ { epsilon0, delta0 } => (Some(*epsilon0), None, Some(*delta0)),
        EstimatorKind::ReplicableQ {
            epsilon,
            rho,
            delta,
        }
        | EstimatorKind::ReplicablePolicy {
            epsilon,
            rho,
            delta,
        }
        | EstimatorKind::TvIndQ {
            epsilon,
            rho,
            delta,
        }
        | EstimatorKind::TvIndPolicy {
            epsilon,
            rho,
            delta,
        }
        | EstimatorKind::CoupledQ {
            epsilon,
            rho,
            delta,
            ..
        }
        | EstimatorKind::PolicyEval {
            epsilon,
            rho,
            delta,
            ..
        } => (Some(*epsilon), Some(*rho), Some(*delta)),
        EstimatorKind::ApproxPolicy {
            epsilon,
            rho1,
            delta,
            ..
        } => (Some(*epsilon), Some(*rho1), Some(*delta)),
        EstimatorKind::GaussianCoupling { tv, .. } => (None, Some(*tv), None),
    }
}

fn run_experiment(exp: &Experiment, seed: u64) -> Result<ExperimentResult> {
    match exp {
        Experiment::Paired {
            name,
            mdp,
            estimator,
            trials,
        } => {
            let mdp_loaded = match mdp {
                Some(src) => Some(src.load(seed, name)?),
                None => None,
            };
            let config = PairedConfig {
                estimator: estimator.clone(),
                trials: *trials,
                root_seed: SeedStream::from_root(seed).child(name).rng().next_u64(),
            };
            let report = paired_run(&config, mdp_loaded.as_ref())?;
            let (epsilon, rho, delta) = estimator_fields(estimator);
            Ok(ExperimentResult {
                row: SummaryRow {
                    experiment: name.clone(),
                    estimator: report.estimator.clone(),
                    n_pairs: mdp_loaded.as_ref().map(|m| m.n_pairs()),
                    gamma: mdp_loaded.as_ref().map(|m| m.gamma()),
                    epsilon,
                    rho,
                    delta,
                    samples_total: report.samples_total,
                    agreement_rate: Some(report.agreement_rate),
                    accuracy_rate: Some(report.accuracy_rate),
                },
                output: serde_json::to_value(&report)?,
                csv: None,
                seed_paths: report.seed_paths.clone(),
            })
        }
        Experiment::Solve { name, mdp, tol } => {
            let mdp = mdp.load(seed, name)?;
            let q = exact_value_iteration(&mdp, *tol)?;
            let v = v_from_q(&mdp, &q);
            let pi = greedy_policy(&mdp, &q)?;
            Ok(ExperimentResult {
                row: SummaryRow {
                    experiment: name.clone(),
                    estimator: "exact-solve".to_string(),
                    n_pairs: Some(mdp.n_pairs()),
                    gamma: Some(mdp.gamma()),
                    epsilon: Some(*tol),
                    rho: None,
                    delta: None,
                    samples_total: 0,
                    agreement_rate: None,
                    accuracy_rate: None,
                },
                output: json!({ "q": q.values, "v": v.values, "greedy_policy": pi }),
                csv: None,
                seed_paths: vec![],
            })
        }
        Experiment::CoinCurve {
            name,
            q,
            epsilon,
            m,
            trials,
            grid,
        } => {
            if !(*q < 1.0 && q - epsilon > 0.5) {
                return Err(Error::Config(format!(
                    "coin curve needs q - eps in (1/2, 1): q = {q}, eps = {epsilon}"
                )));
            }
            let threshold = q - epsilon / 2.0;
            let classify = move |flips: &[u8]| {
                let mean = flips.iter().map(|&f| f as f64).sum::<f64>() / flips.len() as f64;
                mean > threshold
            };
            let external = SeedStream::from_root(seed).child(name).child("flips");
            let curve = acceptance_curve(classify, grid, *m, *trials, &external)?;
            let mut csv = String::from("p,acc_estimate,ci_low,ci_high,m,trials,seed\n");
            for pt in &curve.points {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    pt.p, pt.acc, pt.ci_low, pt.ci_high, m, trials, seed
                ));
            }
            Ok(ExperimentResult {
                row: SummaryRow {
                    experiment: name.clone(),
                    estimator: "coin-curve".to_string(),
                    n_pairs: None,
                    gamma: None,
                    epsilon: Some(*epsilon),
                    rho: None,
                    delta: None,
                    samples_total: *m as u64 * u64::from(*trials) * grid.len() as u64,
                    agreement_rate: None,
                    accuracy_rate: None,
                },
                output: serde_json::to_value(&curve)?,
                csv: Some(csv),
                seed_paths: vec![format!("{name}/flips/grid.{{i}}/trial.{{j}}")],
            })
        }
        Experiment::CoinSweep {
            name,
            q,
            epsilon,
            ms,
            trials,
        } => {
            if !(*q < 1.0 && q - epsilon > 0.5) {
                return Err(Error::Config(format!(
                    "coin sweep needs q - eps in (1/2, 1): q = {q}, eps = {epsilon}"
                )));
            }
            let root = SeedStream::from_root(seed).child(name);
            let mut csv = String::from("m,inconsistency,ci_low,ci_high,trials,seed\n");
            let mut rows = Vec::new();
            let mut samples = 0u64;
            for (i, &m) in ms.iter().enumerate() {
                let rate = naive_paired_inconsistency(
                    *q,
                    *epsilon,
                    m,
                    *trials,
                    &root.child_idx("m", i as u64),
                );
                let differs = (rate * f64::from(*trials)).round() as u32;
                let (lo, hi) = wilson_interval(differs, *trials);
                csv.push_str(&format!("{m},{rate},{lo},{hi},{trials},{seed}\n"));
                rows.push(json!({ "m": m, "inconsistency": rate }));
                samples += 2 * m as u64 * u64::from(*trials);
            }
            Ok(ExperimentResult {
                row: SummaryRow {
                    experiment: name.clone(),
                    estimator: "coin-sweep".to_string(),
                    n_pairs: None,
                    gamma: None,
                    epsilon: Some(*epsilon),
                    rho: None,
                    delta: None,
                    samples_total: samples,
                    agreement_rate: None,
                    accuracy_rate: None,
                },
                output: json!({ "points": rows }),
                csv: Some(csv),
                seed_paths: vec![format!("{name}/m.{{i}}/trial.{{j}}")],
            })
        }
        Experiment::MeanScaling {
            name,
            epsilon,
            rhos,
            delta,
        } => {
            let mut csv = String::from("rho,sample_budget,ratio_to_previous\n");
            let mut budgets = Vec::new();
            for &rho in rhos {
                let params = SqParams::new(*epsilon, rho, *delta)?;
                budgets.push(params.sample_budget() as u64);
            }
            for (i, (&rho, &b)) in rhos.iter().zip(&budgets).enumerate() {
                let ratio = if i == 0 {
                    String::new()
                } else {
                    (b as f64 / budgets[i - 1] as f64).to_string()
                };
                csv.push_str(&format!("{rho},{b},{ratio}\n"));
            }
            Ok(ExperimentResult {
                row: SummaryRow {
                    experiment: name.clone(),
                    estimator: "replicable-mean-budget".to_string(),
                    n_pairs: None,
                    gamma: None,
                    epsilon: Some(*epsilon),
                    rho: None,
                    delta: Some(*delta),
                    samples_total: budgets.iter().sum(),
                    agreement_rate: None,
                    accuracy_rate: None,
                },
                output: json!({ "rhos": rhos, "budgets": budgets }),
                csv: Some(csv),
                seed_paths: vec![],
            })
        }
    }
}

/// Execute a suite, writing records, per-experiment CSVs, the summary
/// table, and timings under `out_dir`.
///
/// A failing experiment is recorded and skipped; the remaining
/// experiments still run. The summary CSV contains only deterministic
/// columns and reproduces byte-identically for the same
/// `(config, seed)`.
pub fn run_suite(config: &SuiteConfig, out_dir: &Path) -> Result<SuiteOutcome> {
    fs::create_dir_all(out_dir.join("records"))?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut timings = String::from("experiment,wall_ms\n");

    for exp in &config.experiments {
        let started_unix_ms = unix_ms();
        let started = Instant::now();
        match run_experiment(exp, config.seed) {
            Ok(result) => {
                let wall_ms = started.elapsed().as_millis() as u64;
                let record = RunRecord {
                    name: exp.name().to_string(),
                    command: result.row.estimator.clone(),
                    config: serde_json::to_value(exp)?,
                    root_seed: config.seed,
                    seed_paths: result.seed_paths,
                    started_unix_ms,
                    finished_unix_ms: unix_ms(),
                    wall_ms,
                    samples_total: result.row.samples_total,
                    output: result.output,
                };
                fs::write(
                    out_dir.join("records").join(format!("{}.json", exp.name())),
                    serde_json::to_string_pretty(&record)?,
                )?;
                if let Some(csv) = result.csv {
                    fs::write(out_dir.join(format!("{}.csv", exp.name())), csv)?;
                }
                timings.push_str(&format!("{},{wall_ms}\n", exp.name()));
                rows.push(result.row);
            }
            Err(err) => {
                failures.push((exp.name().to_string(), err.to_string()));
                timings.push_str(&format!(
                    "{},{}\n",
                    exp.name(),
                    started.elapsed().as_millis()
                ));
            }
        }
    }

    let summary_csv = out_dir.join("summary.csv");
    fs::write(&summary_csv, summary_csv_text(&rows))?;
    fs::write(out_dir.join("timings.csv"), timings)?;
    Ok(SuiteOutcome {
        rows,
        failures,
        summary_csv,
    })
}
