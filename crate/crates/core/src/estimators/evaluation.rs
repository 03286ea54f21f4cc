//! Replicable evaluation of a given policy's Q-function.
//!
//! The value function of an explicit policy is the optimal (and only)
//! Q-function of the single-action chain MDP whose rows are the
//! policy-averaged transition rows. The estimator:
//!
//! 1. estimates `V^pi` by running the plug-in oracle on the sampled
//!    chain (one generator sample per chain transition, via a policy
//!    draw followed by a transition draw);
//! 2. estimates `Q^pi(s,a) = r(s,a) + gamma E[V_hat(s')]` with plain
//!    Hoeffding mean queries of `V_hat` at the sampled next states;
//! 3. applies multi-query rounding, which makes the table replicable.
//!
//! Both stages run at per-coordinate accuracy `eps'/(2N)`, so the
//! combined table is within `eps'` of `Q^pi` in L1 norm and the
//! rounded output is within `eps` per coordinate.

use crate::error::Result;
use crate::mdp::{exact_value_iteration, Policy, QTable, TabularMdp};
use crate::sampling::GenerativeModel;
use crate::seed::SeedStream;
use crate::sq::{replicable_round_vector, SqParams};

use super::plugin::PLUGIN_SOLVER_TOL;

/// Exact expected reward of the chain at a state:
/// `r'(s) = sum_a pi(s,a) r(s,a)`. Computable without samples since
/// rewards are known.
pub fn chain_reward(mdp: &TabularMdp, policy: &Policy, s: usize) -> f64 {
    (0..mdp.actions(s).len())
        .map(|i| policy.prob(mdp, s, i) * mdp.reward(mdp.pair_index(s, i)))
        .sum()
}

/// The exact single-action chain MDP of a policy: transition rows are
/// policy mixtures of the original rows, rewards the policy-expected
/// rewards. Its unique Q-function equals `V^pi` of the original MDP.
/// Used as a test oracle; the estimator itself only samples the chain.
pub fn policy_chain_mdp(mdp: &TabularMdp, policy: &Policy) -> Result<TabularMdp> {
    policy.validate(mdp)?;
    let s_count = mdp.num_states();
    let mut transition = Vec::with_capacity(s_count);
    let mut reward = Vec::with_capacity(s_count);
    for s in 0..s_count {
        let mut row = vec![0.0f64; s_count];
        for i in 0..mdp.actions(s).len() {
            let w = policy.prob(mdp, s, i);
            if w == 0.0 {
                continue;
            }
            for (s1, &p) in mdp.transition_row(mdp.pair_index(s, i)).iter().enumerate() {
                row[s1] += w * p;
            }
        }
        let sum: f64 = row.iter().sum();
        for p in &mut row {
            *p /= sum;
        }
        transition.push(vec![row]);
        reward.push(vec![chain_reward(mdp, policy, s)]);
    }
    TabularMdp::new(
        s_count,
        vec![vec![0]; s_count],
        transition,
        reward,
        mdp.gamma(),
        mdp.initial_state(),
    )
}

struct EvalBudgets {
    /// Chain samples per state (stage 1).
    chain_per_state: u64,
    /// Next-state draws per pair (stage 2).
    mean_per_pair: u64,
}

fn budgets(mdp: &TabularMdp, params: &SqParams) -> EvalBudgets {
    let n = mdp.n_pairs() as f64;
    let gamma = mdp.gamma();
    let t = params.raw_accuracy() / (2.0 * n);
    // Stage 1 uses the plug-in rule on the chain (|S| pairs); stage 2 a
    // Hoeffding rule for means of V_hat in [0, 1/(1-gamma)].
    let chain_log = (2.0 * mdp.num_states() as f64 / (params.delta() / 2.0)).ln();
    let chain = (2.0 * chain_log / ((1.0 - gamma) * (1.0 - gamma) * t * t)).ceil() as u64;
    let mean_log = (4.0 * n / params.delta()).ln();
    let mean = (2.0 * mean_log / ((1.0 - gamma) * (1.0 - gamma) * t * t)).ceil() as u64;
    EvalBudgets {
        chain_per_state: chain,
        mean_per_pair: mean,
    }
}

/// Generator samples one [`replicable_policy_evaluation`] call draws.
pub fn policy_evaluation_budget(
    mdp: &TabularMdp,
    epsilon: f64,
    rho: f64,
    delta: f64,
) -> Result<u64> {
    let params = SqParams::new(epsilon, rho, delta)?;
    let b = budgets(mdp, &params);
    Ok(mdp.num_states() as u64 * b.chain_per_state + mdp.n_pairs() as u64 * b.mean_per_pair)
}

/// Replicable estimation of `Q^pi` for an explicit policy:
/// `||Q_hat - Q^pi||_inf <= eps` with probability `1 - delta`, paired
/// executions sharing `internal` agree with probability at least
/// `1 - rho`. Requires `delta < rho/3`.
pub fn replicable_policy_evaluation(
    g: &mut GenerativeModel,
    policy: &Policy,
    epsilon: f64,
    rho: f64,
    delta: f64,
    internal: &SeedStream,
) -> Result<QTable> {
    policy.validate(g.mdp())?;
    let params = SqParams::new(epsilon, rho, delta)?;
    let mdp = g.mdp();
    let s_count = mdp.num_states();
    let range = mdp.value_range();
    let b = budgets(mdp, &params);

    // Stage 1: empirical chain model, solved exactly, clipped.
    let mut chain_rows = Vec::with_capacity(s_count);
    let mut chain_rewards = Vec::with_capacity(s_count);
    for s in 0..s_count {
        let mut counts = vec![0u64; s_count];
        for _ in 0..b.chain_per_state {
            counts[g.sample_policy_transition(policy, s)?] += 1;
        }
        let mut row: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / b.chain_per_state as f64)
            .collect();
        let sum: f64 = row.iter().sum();
        for p in &mut row {
            *p /= sum;
        }
        chain_rows.push(vec![row]);
        chain_rewards.push(vec![chain_reward(g.mdp(), policy, s)]);
    }
    let chain_hat = TabularMdp::new(
        s_count,
        vec![vec![0]; s_count],
        chain_rows,
        chain_rewards,
        g.mdp().gamma(),
        g.mdp().initial_state(),
    )?;
    let mut v_hat = exact_value_iteration(&chain_hat, PLUGIN_SOLVER_TOL)?;
    for v in &mut v_hat.values {
        *v = v.clamp(0.0, range);
    }

    // Stage 2: Q-bar(s,a) = r(s,a) + gamma * mean_j V_hat(s'_j).
    let mut q_bar = Vec::with_capacity(g.mdp().n_pairs());
    for s in 0..s_count {
        for i in 0..g.mdp().actions(s).len() {
            let mut acc = 0.0;
            for _ in 0..b.mean_per_pair {
                acc += v_hat.values[g.sample_transition(s, i)?];
            }
            let mean = acc / b.mean_per_pair as f64;
            q_bar.push(g.mdp().reward(g.mdp().pair_index(s, i)) + g.mdp().gamma() * mean);
        }
    }

    // Stage 3: replicable rounding with the L1 certificate eps'.
    let rounded = replicable_round_vector(
        &q_bar,
        params.raw_accuracy(),
        &params,
        internal,
        Some((0.0, range)),
    )?;
    Ok(QTable {
        values: rounded.values,
    })
}
