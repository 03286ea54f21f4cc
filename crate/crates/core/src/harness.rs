//! Paired-run replicability measurement.
//!
//! A paired trial derives one shared internal stream and two disjoint
//! external streams from a per-trial stream, runs the estimator once
//! on each external stream, and scores the two outputs under the
//! estimator's replicability notion: exact bit equality for rounded or
//! coupled outputs, the closed-form KL certificate for
//! TV-indistinguishable outputs, and a per-state Renyi threshold for
//! approximately replicable policies. Accuracy against the exactly
//! solved ground truth is tracked alongside.
//!
//! Everything is deterministic in `(configuration, root seed)`: trials
//! are pre-split off the root stream, so they can run in parallel and
//! still aggregate to identical reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::coupling::{gap_for_target_tv, ppp_coupled_sample, TruncationBox, DEFAULT_BOX_SIGMAS};
use crate::divergence::{kl_gaussian_isotropic, GaussianVector, RenyiOrder};
use crate::error::{Error, Result};
use crate::estimators::{
    approx_replicable_policy, max_state_divergence, plugin_q_oracle, replicable_policy,
    replicable_policy_evaluation, replicable_q, replicable_q_via_coupling, softmax_policy,
    tv_ind_policy, tv_ind_q, CoupledQOptions, QOracleConfig, SoftMaxParams,
};
use crate::mdp::{
    exact_policy_evaluation, exact_q_of_policy, exact_value_iteration, greedy_policy, v_from_q,
    Policy, QTable, TabularMdp, VTable,
};
use crate::sampling::GenerativeModel;
use crate::seed::SeedStream;

/// Two-sided 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u32, trials: u32) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = f64::from(trials);
    let p = f64::from(successes) / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Which estimator a paired run exercises, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Deterministic exact solver; the trivial baseline with
    /// agreement rate 1.
    ExactSolve {
        tol: f64,
    },
    /// The un-rounded plug-in oracle; agreement under bit equality is
    /// essentially zero on stochastic MDPs.
    NaiveQ {
        epsilon0: f64,
        delta0: f64,
    },
    ReplicableQ {
        epsilon: f64,
        rho: f64,
        delta: f64,
    },
    ReplicablePolicy {
        epsilon: f64,
        rho: f64,
        delta: f64,
    },
    TvIndQ {
        epsilon: f64,
        rho: f64,
        delta: f64,
    },
    TvIndPolicy {
        epsilon: f64,
        rho: f64,
        delta: f64,
    },
    CoupledQ {
        epsilon: f64,
        rho: f64,
        delta: f64,
        #[serde(default)]
        box_sigmas: Option<f64>,
        #[serde(default)]
        atom_budget: Option<usize>,
    },
    ApproxPolicy {
        epsilon: f64,
        rho1: f64,
        rho2: f64,
        delta: f64,
        alpha: RenyiOrder,
    },
    PolicyEval {
        epsilon: f64,
        rho: f64,
        delta: f64,
        policy: Policy,
    },
    /// Pure coupling diagnostic on two fixed Gaussians at a target TV
    /// distance; no MDP involved.
    GaussianCoupling {
        dim: usize,
        sigma: f64,
        tv: f64,
        #[serde(default)]
        box_sigmas: Option<f64>,
        #[serde(default)]
        atom_budget: Option<usize>,
    },
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::ExactSolve { .. } => "exact-solve",
            EstimatorKind::NaiveQ { .. } => "naive-q",
            EstimatorKind::ReplicableQ { .. } => "replicable-q",
            EstimatorKind::ReplicablePolicy { .. } => "replicable-policy",
            EstimatorKind::TvIndQ { .. } => "tv-ind-q",
            EstimatorKind::TvIndPolicy { .. } => "tv-ind-policy",
            EstimatorKind::CoupledQ { .. } => "coupled-q",
            EstimatorKind::ApproxPolicy { .. } => "approx-policy",
            EstimatorKind::PolicyEval { .. } => "policy-eval",
            EstimatorKind::GaussianCoupling { .. } => "gaussian-coupling",
        }
    }

    /// The agreement notion the report's rate refers to.
    pub fn notion(&self) -> String {
        match self {
            EstimatorKind::TvIndQ { .. } | EstimatorKind::TvIndPolicy { .. } => {
                "tv_certificate".to_string()
            }
            EstimatorKind::ApproxPolicy { rho1, alpha, .. } => {
                format!("approx(alpha={alpha}, rho1={rho1})")
            }
            _ => "exact".to_string(),
        }
    }

    pub fn needs_mdp(&self) -> bool {
        !matches!(self, EstimatorKind::GaussianCoupling { .. })
    }

    fn params_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("estimator kinds serialize")
    }
}

/// Paired-run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedConfig {
    pub estimator: EstimatorKind,
    pub trials: u32,
    pub root_seed: u64,
}

/// Agreement statistics of a paired run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicabilityReport {
    pub estimator: String,
    pub notion: String,
    pub trials: u32,
    pub agreements: u32,
    pub agreement_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Accuracy checks cover both runs of every trial.
    pub accuracy_checks: u32,
    pub accuracy_hits: u32,
    pub accuracy_rate: f64,
    /// Generator samples drawn by a single run (identical across runs
    /// by the budget formulas).
    pub samples_per_run: u64,
    /// Total generator samples across all runs of all trials.
    pub samples_total: u64,
    pub root_seed: u64,
    /// Stream derivation scheme used for the trials.
    pub seed_paths: Vec<String>,
    pub params: serde_json::Value,
}

struct TrialOutcome {
    agree: bool,
    acc_a: bool,
    acc_b: bool,
    samples_a: u64,
    samples_b: u64,
}

struct GroundTruth {
    q_star: QTable,
    v_star: VTable,
    /// Exact `Q^pi` when evaluating a fixed policy.
    q_pi: Option<QTable>,
}

const TRUTH_TOL: f64 = 1e-10;

fn ground_truth(mdp: &TabularMdp, kind: &EstimatorKind) -> Result<GroundTruth> {
    let q_star = exact_value_iteration(mdp, TRUTH_TOL)?;
    let v_star = v_from_q(mdp, &q_star);
    let q_pi = match kind {
        EstimatorKind::PolicyEval { policy, .. } => {
            Some(exact_q_of_policy(mdp, policy, TRUTH_TOL)?)
        }
        _ => None,
    };
    Ok(GroundTruth {
        q_star,
        v_star,
        q_pi,
    })
}

fn policy_accurate(mdp: &TabularMdp, truth: &GroundTruth, pi: &Policy, eps: f64) -> Result<bool> {
    let v = exact_policy_evaluation(mdp, pi, TRUTH_TOL)?;
    Ok(v.linf_distance(&truth.v_star) <= eps + 1e-8)
}

fn run_trial(
    kind: &EstimatorKind,
    mdp: Option<&TabularMdp>,
    truth: Option<&GroundTruth>,
    trial: &SeedStream,
) -> Result<TrialOutcome> {
    let ext_a = trial.child("external-a");
    let ext_b = trial.child("external-b");
    let internal = trial.child("internal");
    match kind {
        EstimatorKind::ExactSolve { tol } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let a = exact_value_iteration(mdp, *tol)?;
            let b = exact_value_iteration(mdp, *tol)?;
            Ok(TrialOutcome {
                agree: a.bit_equal(&b),
                acc_a: a.linf_distance(&truth.q_star) <= *tol + TRUTH_TOL,
                acc_b: b.linf_distance(&truth.q_star) <= *tol + TRUTH_TOL,
                samples_a: 0,
                samples_b: 0,
            })
        }
        EstimatorKind::NaiveQ { epsilon0, delta0 } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let cfg = QOracleConfig::new(*epsilon0, *delta0)?;
            let mut ga = GenerativeModel::new(mdp, &ext_a);
            let mut gb = GenerativeModel::new(mdp, &ext_b);
            let a = plugin_q_oracle(&mut ga, &cfg)?;
            let b = plugin_q_oracle(&mut gb, &cfg)?;
            Ok(TrialOutcome {
                agree: a.bit_equal(&b),
                acc_a: a.linf_distance(&truth.q_star) <= *epsilon0,
                acc_b: b.linf_distance(&truth.q_star) <= *epsilon0,
                samples_a: ga.ledger().total(),
                samples_b: gb.ledger().total(),
            })
        }
        EstimatorKind::ReplicableQ {
            epsilon,
            rho,
            delta,
        } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let mut ga = GenerativeModel::new(mdp, &ext_a);
            let mut gb = GenerativeModel::new(mdp, &ext_b);
            let a = replicable_q(&mut ga, *epsilon, *rho, *delta, &internal)?;
            let b = replicable_q(&mut gb, *epsilon, *rho, *delta, &internal)?;
            Ok(TrialOutcome {
                agree: a.bit_equal(&b),
                acc_a: a.linf_distance(&truth.q_star) <= *epsilon,
                acc_b: b.linf_distance(&truth.q_star) <= *epsilon,
                samples_a: ga.ledger().total(),
                samples_b: gb.ledger().total(),
            })
        }
        EstimatorKind::ReplicablePolicy {
            epsilon,
            rho,
            delta,
        } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let mut ga = GenerativeModel::new(mdp, &ext_a);
            let mut gb = GenerativeModel::new(mdp, &ext_b);
            let a = replicable_policy(&mut ga, *epsilon, *rho, *delta, &internal)?;
            let b = replicable_policy(&mut gb, *epsilon, *rho, *delta, &internal)?;
            Ok(TrialOutcome {
                agree: a.bit_equal(&b),
                acc_a: policy_accurate(mdp, truth, &a, *epsilon)?,
                acc_b: policy_accurate(mdp, truth, &b, *epsilon)?,
                samples_a: ga.ledger().total(),
                samples_b: gb.ledger().total(),
            })
        }
        EstimatorKind::TvIndQ {
            epsilon,
            rho,
            delta,
        } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let mut ga = GenerativeModel::new(mdp, &ext_a);
            let mut gb = GenerativeModel::new(mdp, &ext_b);
            let a = tv_ind_q(&mut ga, *epsilon, *rho, *delta, &trial.child("noise-a"))?;
            let b = tv_ind_q(&mut gb, *epsilon, *rho, *delta, &trial.child("noise-b"))?;
            // Certificate: when both runs' raw means meet the accuracy
            // target, the realized KL must be at most rho^2.
            let kl = kl_gaussian_isotropic(&a.output_density(), &b.output_density())?;
            Ok(TrialOutcome {
                agree: kl <= rho * rho,
                acc_a: a.q.linf_distance(&truth.q_star) <= *epsilon,
                acc_b: b.q.linf_distance(&truth.q_star) <= *epsilon,
                samples_a: ga.ledger().total(),
                samples_b: gb.ledger().total(),
            })
        }
        EstimatorKind::TvIndPolicy {
            epsilon,
            rho,
            delta,
        } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let mut ga = GenerativeModel::new(mdp, &ext_a);
            let mut gb = GenerativeModel::new(mdp, &ext_b);
            let (pa, qa) = tv_ind_policy(&mut ga, *epsilon, *rho, *delta, &trial.child("noise-a"))?;
            let (pb, qb) = tv_ind_policy(&mut gb, *epsilon, *rho, *delta, &trial.child("noise-b"))?;
            let kl = kl_gaussian_isotropic(&qa.output_density(), &qb.output_density())?;
            Ok(TrialOutcome {
                agree: kl <= rho * rho,
                acc_a: policy_accurate(mdp, truth, &pa, *epsilon)?,
                acc_b: policy_accurate(mdp, truth, &pb, *epsilon)?,
                samples_a: ga.ledger().total(),
                samples_b: gb.ledger().total(),
            })
        }
        EstimatorKind::CoupledQ {
            epsilon,
            rho,
            delta,
            box_sigmas,
            atom_budget,
        } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let opts = CoupledQOptions {
                box_sigmas: box_sigmas.unwrap_or(DEFAULT_BOX_SIGMAS),
                atom_budget: *atom_budget,
            };
            let mut ga = GenerativeModel::new(mdp, &ext_a);
            let mut gb = GenerativeModel::new(mdp, &ext_b);
            let a = replicable_q_via_coupling(&mut ga, *epsilon, *rho, *delta, &internal, &opts)?;
            let b = replicable_q_via_coupling(&mut gb, *epsilon, *rho, *delta, &internal, &opts)?;
            Ok(TrialOutcome {
                agree: a.bit_equal(&b),
                acc_a: a.linf_distance(&truth.q_star) <= *epsilon,
                acc_b: b.linf_distance(&truth.q_star) <= *epsilon,
                samples_a: ga.ledger().total(),
                samples_b: gb.ledger().total(),
            })
        }
        EstimatorKind::ApproxPolicy {
            epsilon,
            rho1,
            rho2,
            delta,
            alpha,
        } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let params = SoftMaxParams::for_policy_estimation(mdp, *epsilon, *rho1, *rho2, *alpha)?;
            // Approximate replicability uses independent internal
            // randomness; the estimator consumes none at all.
            let mut ga = GenerativeModel::new(mdp, &ext_a);
            let mut gb = GenerativeModel::new(mdp, &ext_b);
            let a = approx_replicable_policy(&mut ga, &params, *delta)?;
            let b = approx_replicable_policy(&mut gb, &params, *delta)?;
            let div = max_state_divergence(&a, &b, *alpha)?;
            Ok(TrialOutcome {
                agree: div <= *rho1,
                acc_a: policy_accurate(mdp, truth, &a, *epsilon)?,
                acc_b: policy_accurate(mdp, truth, &b, *epsilon)?,
                samples_a: ga.ledger().total(),
                samples_b: gb.ledger().total(),
            })
        }
        EstimatorKind::PolicyEval {
            epsilon,
            rho,
            delta,
            policy,
        } => {
            let mdp = mdp.expect("mdp required");
            let truth = truth.expect("truth required");
            let q_pi = truth.q_pi.as_ref().expect("policy truth");
            let mut ga = GenerativeModel::new(mdp, &ext_a);
            let mut gb = GenerativeModel::new(mdp, &ext_b);
            let a =
                replicable_policy_evaluation(&mut ga, policy, *epsilon, *rho, *delta, &internal)?;
            let b =
                replicable_policy_evaluation(&mut gb, policy, *epsilon, *rho, *delta, &internal)?;
            Ok(TrialOutcome {
                agree: a.bit_equal(&b),
                acc_a: a.linf_distance(q_pi) <= *epsilon,
                acc_b: b.linf_distance(q_pi) <= *epsilon,
                samples_a: ga.ledger().total(),
                samples_b: gb.ledger().total(),
            })
        }
        EstimatorKind::GaussianCoupling {
            dim,
            sigma,
            tv,
            box_sigmas,
            atom_budget,
        } => {
            if *dim == 0 {
                return Err(Error::Config(
                    "coupling dimension must be positive".to_string(),
                ));
            }
            if !(*sigma > 0.0) {
                return Err(Error::Config(format!(
                    "coupling sigma must be positive, got {sigma}"
                )));
            }
            if !(0.0..1.0).contains(tv) {
                return Err(Error::Config(format!(
                    "target TV must lie in [0, 1), got {tv}"
                )));
            }
            let gap = if *tv > 0.0 {
                gap_for_target_tv(*tv, *sigma)
            } else {
                0.0
            };
            let mut mean_a = vec![0.5; *dim];
            let mut mean_b = vec![0.5; *dim];
            mean_a[0] -= gap / 2.0;
            mean_b[0] += gap / 2.0;
            let sigma_sq = sigma * sigma;
            let mut lo = vec![0.5; *dim];
            let mut hi = vec![0.5; *dim];
            lo[0] = mean_a[0];
            hi[0] = mean_b[0];
            let boxx = TruncationBox::for_gaussian_family(
                &lo,
                &hi,
                sigma_sq,
                box_sigmas.unwrap_or(DEFAULT_BOX_SIGMAS),
            )?;
            let budget = atom_budget.unwrap_or_else(|| boxx.recommended_atom_budget());
            let da = GaussianVector::new(mean_a, sigma_sq)?;
            let db = GaussianVector::new(mean_b, sigma_sq)?;
            let xa = ppp_coupled_sample(&da, &boxx, budget, &internal)?;
            let xb = ppp_coupled_sample(&db, &boxx, budget, &internal)?;
            let agree = xa.iter().zip(&xb).all(|(a, b)| a.to_bits() == b.to_bits());
            Ok(TrialOutcome {
                agree,
                acc_a: true,
                acc_b: true,
                samples_a: 0,
                samples_b: 0,
            })
        }
    }
}

/// Run `trials` paired executions of the estimator and aggregate the
/// agreement and accuracy statistics.
pub fn paired_run(config: &PairedConfig, mdp: Option<&TabularMdp>) -> Result<ReplicabilityReport> {
    if config.trials < 30 {
        return Err(Error::Config(format!(
            "paired runs need at least 30 trials, got {}",
            config.trials
        )));
    }
    if config.estimator.needs_mdp() && mdp.is_none() {
        return Err(Error::Config(format!(
            "estimator '{}' requires an MDP",
            config.estimator.name()
        )));
    }
    let truth = match mdp {
        Some(m) => Some(ground_truth(m, &config.estimator)?),
        None => None,
    };
    let root = SeedStream::from_root(config.root_seed);

    let outcomes: Result<Vec<TrialOutcome>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let trial = root.child_idx("trial", u64::from(t));
            run_trial(&config.estimator, mdp, truth.as_ref(), &trial)
        })
        .collect();
    let outcomes = outcomes?;

    let agreements = outcomes.iter().filter(|o| o.agree).count() as u32;
    let accuracy_hits = outcomes
        .iter()
        .map(|o| u32::from(o.acc_a) + u32::from(o.acc_b))
        .sum::<u32>();
    let accuracy_checks = 2 * config.trials;
    let samples_total: u64 = outcomes.iter().map(|o| o.samples_a + o.samples_b).sum();
    let samples_per_run = outcomes.first().map_or(0, |o| o.samples_a);
    debug_assert!(outcomes
        .iter()
        .all(|o| o.samples_a == samples_per_run && o.samples_b == samples_per_run));

    let (wilson_low, wilson_high) = wilson_interval(agreements, config.trials);
    Ok(ReplicabilityReport {
        estimator: config.estimator.name().to_string(),
        notion: config.estimator.notion(),
        trials: config.trials,
        agreements,
        agreement_rate: f64::from(agreements) / f64::from(config.trials),
        wilson_low,
        wilson_high,
        accuracy_checks,
        accuracy_hits,
        accuracy_rate: f64::from(accuracy_hits) / f64::from(accuracy_checks),
        samples_per_run,
        samples_total,
        root_seed: config.root_seed,
        seed_paths: vec![
            "trial.{i}/internal".to_string(),
            "trial.{i}/external-a".to_string(),
            "trial.{i}/external-b".to_string(),
            "trial.{i}/noise-a".to_string(),
            "trial.{i}/noise-b".to_string(),
        ],
        params: config.estimator.params_json(),
    })
}

/// Output of a single (non-paired) estimator run, for the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleRun {
    pub estimator: String,
    pub output: serde_json::Value,
    pub samples: u64,
    pub root_seed: u64,
    pub seed_paths: Vec<String>,
}

/// Execute one estimator run with streams derived from `root_seed`
/// (`external`, `internal`, `noise`).
pub fn single_run(kind: &EstimatorKind, mdp: &TabularMdp, root_seed: u64) -> Result<SingleRun> {
    let root = SeedStream::from_root(root_seed);
    let external = root.child("external");
    let internal = root.child("internal");
    let noise = root.child("noise");
    let mut g = GenerativeModel::new(mdp, &external);
    let output = match kind {
        EstimatorKind::ExactSolve { tol } => {
            let q = exact_value_iteration(mdp, *tol)?;
            let v = v_from_q(mdp, &q);
            let pi = greedy_policy(mdp, &q)?;
            json!({ "q": q.values, "v": v.values, "greedy_policy": pi })
        }
        EstimatorKind::NaiveQ { epsilon0, delta0 } => {
            let cfg = QOracleConfig::new(*epsilon0, *delta0)?;
            let q = plugin_q_oracle(&mut g, &cfg)?;
            json!({ "q": q.values })
        }
        EstimatorKind::ReplicableQ {
            epsilon,
            rho,
            delta,
        } => {
            let q = replicable_q(&mut g, *epsilon, *rho, *delta, &internal)?;
            json!({ "q": q.values })
        }
        EstimatorKind::ReplicablePolicy {
            epsilon,
            rho,
            delta,
        } => {
            let pi = replicable_policy(&mut g, *epsilon, *rho, *delta, &internal)?;
            json!({ "policy": pi })
        }
        EstimatorKind::TvIndQ {
            epsilon,
            rho,
            delta,
        } => {
            let out = tv_ind_q(&mut g, *epsilon, *rho, *delta, &noise)?;
            json!({ "q": out.q.values, "sigma_sq": out.sigma_sq })
        }
        EstimatorKind::TvIndPolicy {
            epsilon,
            rho,
            delta,
        } => {
            let (pi, out) = tv_ind_policy(&mut g, *epsilon, *rho, *delta, &noise)?;
            json!({ "policy": pi, "sigma_sq": out.sigma_sq })
        }
        EstimatorKind::CoupledQ {
            epsilon,
            rho,
            delta,
            box_sigmas,
            atom_budget,
        } => {
            let opts = CoupledQOptions {
                box_sigmas: box_sigmas.unwrap_or(DEFAULT_BOX_SIGMAS),
                atom_budget: *atom_budget,
            };
            let q = replicable_q_via_coupling(&mut g, *epsilon, *rho, *delta, &internal, &opts)?;
            json!({ "q": q.values })
        }
        EstimatorKind::ApproxPolicy {
            epsilon,
            rho1,
            rho2,
            delta,
            alpha,
        } => {
            let params = SoftMaxParams::for_policy_estimation(mdp, *epsilon, *rho1, *rho2, *alpha)?;
            let pi = approx_replicable_policy(&mut g, &params, *delta)?;
            json!({ "policy": pi, "lambda": params.lambda })
        }
        EstimatorKind::PolicyEval {
            epsilon,
            rho,
            delta,
            policy,
        } => {
            let q =
                replicable_policy_evaluation(&mut g, policy, *epsilon, *rho, *delta, &internal)?;
            json!({ "q_pi": q.values })
        }
        EstimatorKind::GaussianCoupling { .. } => {
            return Err(Error::Config(
                "the coupling diagnostic only runs in paired mode".to_string(),
            ))
        }
    };
    Ok(SingleRun {
        estimator: kind.name().to_string(),
        output,
        samples: g.ledger().total(),
        root_seed,
        seed_paths: vec![
            "external".to_string(),
            "internal".to_string(),
            "noise".to_string(),
        ],
    })
}

/// The greedy-translation check used by estimator tests: a soft-max
/// policy table against the optimum. Re-exported here so test suites
/// share one implementation.
pub fn softmax_value_gap(mdp: &TabularMdp, q: &QTable, lambda: f64) -> Result<f64> {
    let pi = softmax_policy(mdp, q, lambda)?;
    let v_pi = exact_policy_evaluation(mdp, &pi, TRUTH_TOL)?;
    let v_star = v_from_q(mdp, &exact_value_iteration(mdp, TRUTH_TOL)?);
    Ok(v_star.linf_distance(&v_pi))
}
