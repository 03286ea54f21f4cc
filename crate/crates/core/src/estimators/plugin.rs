//! The plug-in Q-oracle: the non-replicable black box every estimator
//! post-processes.
//!
//! It draws the same number of samples for every state-action pair,
//! builds the empirical transition model, and solves it exactly. The
//! per-pair budget is a documented Hoeffding-style rule,
//!
//! `m = ceil(2 ln(2N/delta0) / ((1-gamma)^2 eps0^2))`,
//!
//! conservative at desk scale (validated on the closed-form family)
//! without claiming the optimal `(1-gamma)` exponent of the best known
//! oracles.

use crate::error::{Error, Result};
use crate::mdp::{exact_value_iteration, QTable, TabularMdp};
use crate::sampling::GenerativeModel;

/// Tolerance at which the empirical model is solved; negligible next
/// to any feasible `eps0`.
pub const PLUGIN_SOLVER_TOL: f64 = 1e-10;

/// Accuracy/confidence contract of the plug-in oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QOracleConfig {
    epsilon0: f64,
    delta0: f64,
    max_total_samples: Option<u64>,
}

impl QOracleConfig {
    pub fn new(epsilon0: f64, delta0: f64) -> Result<Self> {
        if !(epsilon0 > 0.0 && epsilon0 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "oracle accuracy must lie in (0, 1), got {epsilon0}"
            )));
        }
        if !(delta0 > 0.0 && delta0 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "oracle confidence must lie in (0, 1), got {delta0}"
            )));
        }
        Ok(QOracleConfig {
            epsilon0,
            delta0,
            max_total_samples: None,
        })
    }

    /// Reject runs whose total budget exceeds `max` samples.
    pub fn with_max_samples(mut self, max: u64) -> Self {
        self.max_total_samples = Some(max);
        self
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    /// Samples drawn per state-action pair.
    pub fn per_pair_budget(&self, gamma: f64, n_pairs: usize) -> u64 {
        let log_term = (2.0 * n_pairs as f64 / self.delta0).ln();
        let denom = (1.0 - gamma) * (1.0 - gamma) * self.epsilon0 * self.epsilon0;
        (2.0 * log_term / denom).ceil() as u64
    }

    /// Total ledger cost of one oracle call.
    pub fn total_budget(&self, gamma: f64, n_pairs: usize) -> u64 {
        n_pairs as u64 * self.per_pair_budget(gamma, n_pairs)
    }
}

/// Model-based Q-estimation: `||Q_hat - Q*||_inf <= eps0` with
/// probability `1 - delta0` under the documented budget rule. Output is
/// clipped to the feasible range.
pub fn plugin_q_oracle(g: &mut GenerativeModel, cfg: &QOracleConfig) -> Result<QTable> {
    let mdp = g.mdp();
    let n_pairs = mdp.n_pairs();
    let num_states = mdp.num_states();
    let m = cfg.per_pair_budget(mdp.gamma(), n_pairs);
    let total = cfg.total_budget(mdp.gamma(), n_pairs);
    if let Some(max) = cfg.max_total_samples {
        if total > max {
            return Err(Error::BudgetExceeded {
                requested: total,
                max,
            });
        }
    }

    let mut actions = Vec::with_capacity(num_states);
    let mut transition = Vec::with_capacity(num_states);
    let mut reward = Vec::with_capacity(num_states);
    for s in 0..num_states {
        let ids = g.mdp().actions(s).to_vec();
        let mut rows = Vec::with_capacity(ids.len());
        let mut rs = Vec::with_capacity(ids.len());
        for i in 0..ids.len() {
            let mut counts = vec![0u64; num_states];
            for _ in 0..m {
                counts[g.sample_transition(s, i)?] += 1;
            }
            let mut row: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
            let sum: f64 = row.iter().sum();
            for p in &mut row {
                *p /= sum;
            }
            rows.push(row);
            rs.push(g.mdp().reward(g.mdp().pair_index(s, i)));
        }
        actions.push(ids);
        transition.push(rows);
        reward.push(rs);
    }
    let empirical = TabularMdp::new(
        num_states,
        actions,
        transition,
        reward,
        g.mdp().gamma(),
        g.mdp().initial_state(),
    )?;
    let mut q = exact_value_iteration(&empirical, PLUGIN_SOLVER_TOL)?;
    q.clip(g.mdp());
    Ok(q)
}
