//! Discounted tabular MDPs and their exact solvers.
//!
//! The solvers here are deterministic fixed-point iterations used as
//! ground truth by every estimator test: value iteration for `Q*`,
//! policy evaluation for `V^pi`, and the greedy policy map with a
//! stable tie-break.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::StreamRng;

/// Row sums of transition kernels and stochastic policies must match 1
/// to this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A finite discounted MDP.
///
/// States are `0..num_states`. Each state has a non-empty list of action
/// ids; `(state, action)` pairs are addressed by a flat index in state
/// order, action-list order. `N = n_pairs()` is the total number of
/// state-action pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    num_states: usize,
    actions: Vec<Vec<usize>>,
    /// Flat-pair offset of each state's first action.
    offsets: Vec<usize>,
    /// Transition row per flat pair, each of length `num_states`.
    transition: Vec<Vec<f64>>,
    /// Reward per flat pair, in `[0, 1]`.
    reward: Vec<f64>,
    gamma: f64,
    initial_state: usize,
}

/// On-disk JSON shape of an MDP (see the file-format docs in the README).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MdpFile {
    num_states: usize,
    actions: Vec<Vec<usize>>,
    transition: Vec<Vec<Vec<f64>>>,
    reward: Vec<Vec<f64>>,
    gamma: f64,
    initial_state: usize,
}

impl TabularMdp {
    /// Build and validate an MDP from per-state nested tables.
    ///
    /// `transition[s][i]` is the next-state distribution of the `i`-th
    /// action of state `s`, and `reward[s][i]` its reward.
    pub fn new(
        num_states: usize,
        actions: Vec<Vec<usize>>,
        transition: Vec<Vec<Vec<f64>>>,
        reward: Vec<Vec<f64>>,
        gamma: f64,
        initial_state: usize,
    ) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::InvalidMdp("num_states must be positive".into()));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidMdp(format!(
                "gamma must lie strictly in (0, 1), got {gamma}"
            )));
        }
        if initial_state >= num_states {
            return Err(Error::InvalidMdp(format!(
                "initial_state {initial_state} out of range"
            )));
        }
        if actions.len() != num_states
            || transition.len() != num_states
            || reward.len() != num_states
        {
            return Err(Error::InvalidMdp(
                "actions/transition/reward must have one entry per state".into(),
            ));
        }

        let mut offsets = Vec::with_capacity(num_states);
        let mut flat_transition = Vec::new();
        let mut flat_reward = Vec::new();
        let mut next = 0usize;
        for s in 0..num_states {
            if actions[s].is_empty() {
                return Err(Error::InvalidMdp(format!("state {s} has no actions")));
            }
            let mut seen = actions[s].clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != actions[s].len() {
                return Err(Error::InvalidMdp(format!(
                    "state {s} has duplicate action ids"
                )));
            }
            if transition[s].len() != actions[s].len() || reward[s].len() != actions[s].len() {
                return Err(Error::InvalidMdp(format!(
                    "state {s}: transition/reward rows must match the action list"
                )));
            }
            offsets.push(next);
            for (i, row) in transition[s].iter().enumerate() {
                if row.len() != num_states {
                    return Err(Error::InvalidMdp(format!(
                        "state {s} action {i}: transition row has length {}, want {num_states}",
                        row.len()
                    )));
                }
                let mut sum = 0.0;
                for &p in row {
                    if !(p >= 0.0) {
                        return Err(Error::InvalidMdp(format!(
                            "state {s} action {i}: negative transition probability {p}"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::InvalidMdp(format!(
                        "state {s} action {i}: transition row sums to {sum}"
                    )));
                }
                let r = reward[s][i];
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InvalidMdp(format!(
                        "state {s} action {i}: reward {r} outside [0, 1]"
                    )));
                }
                flat_transition.push(row.clone());
                flat_reward.push(r);
                next += 1;
            }
        }

        Ok(TabularMdp {
            num_states,
            actions,
            offsets,
            transition: flat_transition,
            reward: flat_reward,
            gamma,
            initial_state,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Total number of state-action pairs, `N`.
    pub fn n_pairs(&self) -> usize {
        self.reward.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    /// Action-id list of a state.
    pub fn actions(&self, s: usize) -> &[usize] {
        &self.actions[s]
    }

    /// Flat pair index of the `i`-th action of state `s`.
    pub fn pair_index(&self, s: usize, action_idx: usize) -> usize {
        debug_assert!(action_idx < self.actions[s].len());
        self.offsets[s] + action_idx
    }

    /// Inverse of [`pair_index`]: `(state, action_idx)` of a flat pair.
    pub fn pair_location(&self, pair: usize) -> (usize, usize) {
        debug_assert!(pair < self.n_pairs());
        let s = match self.offsets.binary_search(&pair) {
            Ok(exact) => exact,
            Err(ins) => ins - 1,
        };
        (s, pair - self.offsets[s])
    }

    pub fn transition_row(&self, pair: usize) -> &[f64] {
        &self.transition[pair]
    }

    pub fn reward(&self, pair: usize) -> f64 {
        self.reward[pair]
    }

    /// Upper end of the feasible value range, `1/(1-gamma)`.
    pub fn value_range(&self) -> f64 {
        1.0 / (1.0 - self.gamma)
    }

    /// JSON document in the canonical on-disk schema.
    pub fn to_json(&self) -> String {
        let mut transition = Vec::with_capacity(self.num_states);
        let mut reward = Vec::with_capacity(self.num_states);
        for s in 0..self.num_states {
            let rows: Vec<Vec<f64>> = (0..self.actions[s].len())
                .map(|i| self.transition[self.pair_index(s, i)].clone())
                .collect();
            let rs: Vec<f64> = (0..self.actions[s].len())
                .map(|i| self.reward[self.pair_index(s, i)])
                .collect();
            transition.push(rows);
            reward.push(rs);
        }
        let file = MdpFile {
            num_states: self.num_states,
            actions: self.actions.clone(),
            transition,
            reward,
            gamma: self.gamma,
            initial_state: self.initial_state,
        };
        serde_json::to_string_pretty(&file).expect("MDP serialization cannot fail")
    }

    /// Parse and validate an MDP from the canonical JSON schema.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MdpFile = serde_json::from_str(text)?;
        TabularMdp::new(
            file.num_states,
            file.actions,
            file.transition,
            file.reward,
            file.gamma,
            file.initial_state,
        )
    }
}

/// Dense action-value table over the flat pair index of an MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub values: Vec<f64>,
}

impl QTable {
    pub fn zeros(n_pairs: usize) -> Self {
        QTable {
            values: vec![0.0; n_pairs],
        }
    }

    /// Clip every entry to the feasible range `[0, 1/(1-gamma)]`.
    pub fn clip(&mut self, mdp: &TabularMdp) {
        let hi = mdp.value_range();
        for v in &mut self.values {
            *v = v.clamp(0.0, hi);
        }
    }

    /// Sup-norm distance to another table of the same shape.
    pub fn linf_distance(&self, other: &QTable) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Exact bit equality, the agreement predicate for paired runs.
    pub fn bit_equal(&self, other: &QTable) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Dense state-value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VTable {
    pub values: Vec<f64>,
}

impl VTable {
    pub fn linf_distance(&self, other: &VTable) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A stationary policy, deterministic or stochastic.
///
/// Deterministic policies store one action id per state. Stochastic
/// policies store one probability row per state, aligned with the
/// state's action list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    Deterministic { actions: Vec<usize> },
    Stochastic { rows: Vec<Vec<f64>> },
}

impl Policy {
    /// Validate the policy against an MDP's shape.
    pub fn validate(&self, mdp: &TabularMdp) -> Result<()> {
        match self {
            Policy::Deterministic { actions } => {
                if actions.len() != mdp.num_states() {
                    return Err(Error::ShapeMismatch(format!(
                        "policy has {} states, MDP has {}",
                        actions.len(),
                        mdp.num_states()
                    )));
                }
                for (s, a) in actions.iter().enumerate() {
                    if !mdp.actions(s).contains(a) {
                        return Err(Error::ShapeMismatch(format!(
                            "action id {a} is not available in state {s}"
                        )));
                    }
                }
            }
            Policy::Stochastic { rows } => {
                if rows.len() != mdp.num_states() {
                    return Err(Error::ShapeMismatch(format!(
                        "policy has {} states, MDP has {}",
                        rows.len(),
                        mdp.num_states()
                    )));
                }
                for (s, row) in rows.iter().enumerate() {
                    if row.len() != mdp.actions(s).len() {
                        return Err(Error::ShapeMismatch(format!(
                            "state {s}: policy row has {} entries, want {}",
                            row.len(),
                            mdp.actions(s).len()
                        )));
                    }
                    let mut sum = 0.0;
                    for &p in row {
                        if !(p >= 0.0) {
                            return Err(Error::ShapeMismatch(format!(
                                "state {s}: negative action probability {p}"
                            )));
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > ROW_SUM_TOL {
                        return Err(Error::ShapeMismatch(format!(
                            "state {s}: policy row sums to {sum}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Probability of the `i`-th action of state `s`.
    pub fn prob(&self, mdp: &TabularMdp, s: usize, action_idx: usize) -> f64 {
        match self {
            Policy::Deterministic { actions } => {
                if mdp.actions(s)[action_idx] == actions[s] {
                    1.0
                } else {
                    0.0
                }
            }
            Policy::Stochastic { rows } => rows[s][action_idx],
        }
    }

    /// Element-wise equality, the agreement predicate for paired runs.
    pub fn bit_equal(&self, other: &Policy) -> bool {
        match (self, other) {
            (Policy::Deterministic { actions: a }, Policy::Deterministic { actions: b }) => a == b,
            (Policy::Stochastic { rows: a }, Policy::Stochastic { rows: b }) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(ra, rb)| {
                        ra.len() == rb.len()
                            && ra.iter().zip(rb).all(|(x, y)| x.to_bits() == y.to_bits())
                    })
            }
            _ => false,
        }
    }
}

/// Iteration count after which a gamma-contraction starting from the
/// zero table is guaranteed below `threshold` in sup norm.
fn contraction_iterations(gamma: f64, range: f64, threshold: f64) -> usize {
    // gamma^t * range <= threshold  =>  t >= ln(range/threshold) / ln(1/gamma)
    let t = ((range / threshold).ln() / (1.0 / gamma).ln()).ceil();
    (t.max(1.0) as usize).saturating_add(4)
}

/// Solve the Bellman optimality fixed point to sup-norm accuracy `tol`.
///
/// Iterates `Q <- r + gamma * P max_a Q` until successive iterates are
/// within `tol*(1-gamma)/(2*gamma)`, which bounds the final error by
/// `tol/2`. Deterministic; no randomness is consumed.
pub fn exact_value_iteration(mdp: &TabularMdp, tol: f64) -> Result<QTable> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let gamma = mdp.gamma();
    let threshold = tol * (1.0 - gamma) / (2.0 * gamma);
    let max_iter = contraction_iterations(gamma, mdp.value_range() + 1.0, threshold);

    let n = mdp.n_pairs();
    let mut q = vec![0.0f64; n];
    let mut v = vec![0.0f64; mdp.num_states()];
    for _ in 0..max_iter {
        // v(s) = max_a q(s, a)
        for s in 0..mdp.num_states() {
            let base = mdp.pair_index(s, 0);
            let mut best = q[base];
            for i in 1..mdp.actions(s).len() {
                best = best.max(q[base + i]);
            }
            v[s] = best;
        }
        let mut residual = 0.0f64;
        for pair in 0..n {
            let row = mdp.transition_row(pair);
            let mut exp = 0.0;
            for (s1, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    exp += p * v[s1];
                }
            }
            let next = mdp.reward(pair) + gamma * exp;
            residual = residual.max((next - q[pair]).abs());
            q[pair] = next;
        }
        if residual < threshold {
            break;
        }
    }
    Ok(QTable { values: q })
}

/// State values induced by a Q-table: `V(s) = max_a Q(s, a)`.
pub fn v_from_q(mdp: &TabularMdp, q: &QTable) -> VTable {
    let values = (0..mdp.num_states())
        .map(|s| {
            (0..mdp.actions(s).len())
                .map(|i| q.values[mdp.pair_index(s, i)])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    VTable { values }
}

/// Evaluate a policy's value function to sup-norm accuracy `tol` by
/// fixed-point iteration.
pub fn exact_policy_evaluation(mdp: &TabularMdp, policy: &Policy, tol: f64) -> Result<VTable> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    policy.validate(mdp)?;
    let gamma = mdp.gamma();
    let threshold = tol * (1.0 - gamma) / (2.0 * gamma);
    let max_iter = contraction_iterations(gamma, mdp.value_range() + 1.0, threshold);

    let mut v = vec![0.0f64; mdp.num_states()];
    for _ in 0..max_iter {
        let mut residual = 0.0f64;
        for s in 0..mdp.num_states() {
            let mut next = 0.0;
            for i in 0..mdp.actions(s).len() {
                let w = policy.prob(mdp, s, i);
                if w == 0.0 {
                    continue;
                }
                let pair = mdp.pair_index(s, i);
                let mut exp = 0.0;
                for (s1, &p) in mdp.transition_row(pair).iter().enumerate() {
                    if p > 0.0 {
                        exp += p * v[s1];
                    }
                }
                next += w * (mdp.reward(pair) + gamma * exp);
            }
            residual = residual.max((next - v[s]).abs());
            v[s] = next;
        }
        if residual < threshold {
            break;
        }
    }
    Ok(VTable { values: v })
}

/// Q-values of a policy: `Q^pi(s,a) = r(s,a) + gamma * P(.|s,a) V^pi`.
pub fn exact_q_of_policy(mdp: &TabularMdp, policy: &Policy, tol: f64) -> Result<QTable> {
    let v = exact_policy_evaluation(mdp, policy, tol)?;
    let values = (0..mdp.n_pairs())
        .map(|pair| {
            let exp: f64 = mdp
                .transition_row(pair)
                .iter()
                .enumerate()
                .map(|(s1, &p)| p * v.values[s1])
                .sum();
            mdp.reward(pair) + mdp.gamma() * exp
        })
        .collect();
    Ok(QTable { values })
}

/// Greedy policy of a Q-table. Ties break to the lowest action id, so
/// equal inputs always map to equal policies.
pub fn greedy_policy(mdp: &TabularMdp, q: &QTable) -> Result<Policy> {
    if q.values.len() != mdp.n_pairs() {
        return Err(Error::ShapeMismatch(format!(
            "Q-table has {} entries, MDP has {} pairs",
            q.values.len(),
            mdp.n_pairs()
        )));
    }
    let mut actions = Vec::with_capacity(mdp.num_states());
    for s in 0..mdp.num_states() {
        let ids = mdp.actions(s);
        let mut best_id = ids[0];
        let mut best_q = q.values[mdp.pair_index(s, 0)];
        for (i, &id) in ids.iter().enumerate().skip(1) {
            let qv = q.values[mdp.pair_index(s, i)];
            if qv > best_q || (qv == best_q && id < best_id) {
                best_q = qv;
                best_id = id;
            }
        }
        actions.push(best_id);
    }
    Ok(Policy::Deterministic { actions })
}

/// Random dense MDP for tests and experiments: every state gets
/// `actions_per_state` actions (ids `0..k`), Dirichlet-like random
/// rows, and uniform rewards.
pub fn random_mdp(
    num_states: usize,
    actions_per_state: usize,
    gamma: f64,
    rng: &mut StreamRng,
) -> TabularMdp {
    let actions: Vec<Vec<usize>> = (0..num_states)
        .map(|_| (0..actions_per_state).collect())
        .collect();
    let mut transition = Vec::with_capacity(num_states);
    let mut reward = Vec::with_capacity(num_states);
    for _ in 0..num_states {
        let mut rows = Vec::with_capacity(actions_per_state);
        let mut rs = Vec::with_capacity(actions_per_state);
        for _ in 0..actions_per_state {
            // Normalized exponentials give a uniform draw on the simplex.
            let raw: Vec<f64> = (0..num_states).map(|_| rng.exponential(1.0)).collect();
            let sum: f64 = raw.iter().sum();
            rows.push(raw.iter().map(|x| x / sum).collect());
            rs.push(rng.uniform_f64());
        }
        transition.push(rows);
        reward.push(rs);
    }
    TabularMdp::new(num_states, actions, transition, reward, gamma, 0)
        .expect("randomly generated MDP is valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedStream;
    use approx::assert_abs_diff_eq;

    pub(crate) fn self_loop_mdp(reward: f64, gamma: f64) -> TabularMdp {
        TabularMdp::new(
            1,
            vec![vec![0]],
            vec![vec![vec![1.0]]],
            vec![vec![reward]],
            gamma,
            0,
        )
        .unwrap()
    }

    #[test]
    fn self_loop_geometric_series() {
        // r = 1, gamma = 0.9: Q = 1/(1 - 0.9) = 10.
        let mdp = self_loop_mdp(1.0, 0.9);
        let q = exact_value_iteration(&mdp, 1e-10).unwrap();
        assert_abs_diff_eq!(q.values[0], 10.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_rewards_zero_fixed_point() {
        let mdp = TabularMdp::new(
            2,
            vec![vec![0, 1], vec![0]],
            vec![vec![vec![0.5, 0.5], vec![1.0, 0.0]], vec![vec![0.25, 0.75]]],
            vec![vec![0.0, 0.0], vec![0.0]],
            0.9,
            0,
        )
        .unwrap();
        let q = exact_value_iteration(&mdp, 1e-10).unwrap();
        assert!(q.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bellman_residual_within_tol() {
        let mut rng = SeedStream::from_root(11).child("mdp").rng();
        for trial in 0..10 {
            let mdp = random_mdp(4, 3, 0.9, &mut rng);
            let tol = 1e-9;
            let q = exact_value_iteration(&mdp, tol).unwrap();
            let v = v_from_q(&mdp, &q);
            for pair in 0..mdp.n_pairs() {
                let exp: f64 = mdp
                    .transition_row(pair)
                    .iter()
                    .enumerate()
                    .map(|(s1, &p)| p * v.values[s1])
                    .sum();
                let backup = mdp.reward(pair) + mdp.gamma() * exp;
                assert!(
                    (backup - q.values[pair]).abs() <= tol,
                    "trial {trial}: residual {} at pair {pair}",
                    (backup - q.values[pair]).abs()
                );
            }
        }
    }

    #[test]
    fn policy_evaluation_self_loop() {
        // r = 1, gamma = 0.5 => V = 2 under any policy.
        let mdp = self_loop_mdp(1.0, 0.5);
        let pi = Policy::Deterministic { actions: vec![0] };
        let v = exact_policy_evaluation(&mdp, &pi, 1e-10).unwrap();
        assert_abs_diff_eq!(v.values[0], 2.0, epsilon = 1e-9);
    }

    #[test]
    fn optimal_policy_value_matches_v_star() {
        let mut rng = SeedStream::from_root(12).child("mdp").rng();
        let mdp = random_mdp(5, 3, 0.85, &mut rng);
        let q = exact_value_iteration(&mdp, 1e-10).unwrap();
        let pi = greedy_policy(&mdp, &q).unwrap();
        let v_pi = exact_policy_evaluation(&mdp, &pi, 1e-10).unwrap();
        let v_star = v_from_q(&mdp, &q);
        assert!(v_pi.linf_distance(&v_star) <= 2e-10 * 2.0 + 1e-9);
    }

    #[test]
    fn uniform_policy_on_identical_actions() {
        let mdp = TabularMdp::new(
            1,
            vec![vec![0, 1]],
            vec![vec![vec![1.0], vec![1.0]]],
            vec![vec![0.7, 0.7]],
            0.5,
            0,
        )
        .unwrap();
        let uniform = Policy::Stochastic {
            rows: vec![vec![0.5, 0.5]],
        };
        let det = Policy::Deterministic { actions: vec![0] };
        let vu = exact_policy_evaluation(&mdp, &uniform, 1e-11).unwrap();
        let vd = exact_policy_evaluation(&mdp, &det, 1e-11).unwrap();
        assert_abs_diff_eq!(vu.values[0], vd.values[0], epsilon = 1e-9);
    }

    #[test]
    fn greedy_prefers_higher_q_and_breaks_ties_low() {
        let mdp = TabularMdp::new(
            1,
            vec![vec![0, 1]],
            vec![vec![vec![1.0], vec![1.0]]],
            vec![vec![0.5, 0.5]],
            0.5,
            0,
        )
        .unwrap();
        let q = QTable {
            values: vec![1.0, 0.5],
        };
        assert_eq!(
            greedy_policy(&mdp, &q).unwrap(),
            Policy::Deterministic { actions: vec![0] }
        );
        let tied = QTable {
            values: vec![0.7, 0.7],
        };
        assert_eq!(
            greedy_policy(&mdp, &tied).unwrap(),
            Policy::Deterministic { actions: vec![0] }
        );
    }

    #[test]
    fn greedy_of_exact_q_is_optimal() {
        let mut rng = SeedStream::from_root(13).child("mdp").rng();
        let mdp = random_mdp(4, 2, 0.9, &mut rng);
        let q = exact_value_iteration(&mdp, 1e-10).unwrap();
        let pi = greedy_policy(&mdp, &q).unwrap();
        let v_pi = exact_policy_evaluation(&mdp, &pi, 1e-11).unwrap();
        let v_star = v_from_q(&mdp, &q);
        assert!(v_pi.linf_distance(&v_star) <= 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(exact_value_iteration(&self_loop_mdp(1.0, 0.9), 0.0).is_err());
        assert!(TabularMdp::new(
            1,
            vec![vec![0]],
            vec![vec![vec![0.9]]], // does not sum to 1
            vec![vec![0.5]],
            0.9,
            0
        )
        .is_err());
        assert!(TabularMdp::new(
            1,
            vec![vec![0]],
            vec![vec![vec![1.0]]],
            vec![vec![1.5]], // reward out of range
            0.9,
            0
        )
        .is_err());
        assert!(TabularMdp::new(
            1,
            vec![vec![0]],
            vec![vec![vec![1.0]]],
            vec![vec![0.5]],
            1.0, // gamma not < 1
            0
        )
        .is_err());
        let mdp = self_loop_mdp(1.0, 0.9);
        let bad_policy = Policy::Deterministic { actions: vec![3] };
        assert!(exact_policy_evaluation(&mdp, &bad_policy, 1e-6).is_err());
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let mut rng = SeedStream::from_root(14).child("mdp").rng();
        let mdp = random_mdp(3, 2, 0.9, &mut rng);
        let text = mdp.to_json();
        let back = TabularMdp::from_json(&text).unwrap();
        assert_eq!(mdp, back);
        assert_eq!(text, back.to_json());
    }

    #[test]
    fn pair_indexing_round_trips() {
        let mdp = TabularMdp::new(
            3,
            vec![vec![0, 1, 2], vec![0], vec![0, 1]],
            vec![
                vec![vec![1.0, 0.0, 0.0]; 3],
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]; 2],
            ],
            vec![vec![0.1, 0.2, 0.3], vec![0.4], vec![0.5, 0.6]],
            0.9,
            0,
        )
        .unwrap();
        assert_eq!(mdp.n_pairs(), 6);
        for pair in 0..mdp.n_pairs() {
            let (s, i) = mdp.pair_location(pair);
            assert_eq!(mdp.pair_index(s, i), pair);
        }
    }
}
