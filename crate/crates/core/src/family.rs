//! The hard-instance MDP family with closed-form optimal Q-values.
//!
//! An instance is parameterized by `K`, `L`, a discount `gamma`, and a
//! `K x L` matrix of loop probabilities `p`. The generated MDP has four
//! layers of states:
//!
//! * `K*L` entry states, one per `(k, l)`, each with a single action
//!   that moves deterministically to `x_k` (reward 0);
//! * `K` decision states `x_k`, each with `L` actions; action `l` moves
//!   to the loop state `y(k, l)` with probability `p[k][l]` and to the
//!   sink `z(k, l)` otherwise (reward 1);
//! * `K*L` loop states `y(k, l)` with a single action that self-loops
//!   with probability `p[k][l]` and falls to `z(k, l)` otherwise
//!   (reward 1);
//! * `K*L` absorbing sink states `z(k, l)` (reward 0).
//!
//! Decision action `(k, l)` shares the loop state's coin, so its optimal
//! value solves `Q = 1 + gamma * p * Q`, i.e. `Q*(x_k, a_l) =
//! 1/(1 - gamma * p[k][l])`: estimating these Q-values to high accuracy
//! is exactly identifying the biases of `K*L` independent coins. The
//! instance has `N = 4*K*L` state-action pairs in total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

/// Parameters of one family instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundFamilySpec {
    pub k: usize,
    pub l: usize,
    pub gamma: f64,
    /// `K x L` loop probabilities, each in `[0, 1]`.
    pub p: Vec<Vec<f64>>,
}

impl LowerBoundFamilySpec {
    pub fn new(k: usize, l: usize, gamma: f64, p: Vec<Vec<f64>>) -> Result<Self> {
        if k == 0 || l == 0 {
            return Err(Error::InvalidParameter(
                "K and L must be positive".to_string(),
            ));
        }
        if !(gamma > 0.5 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "family discount must lie in (1/2, 1), got {gamma}"
            )));
        }
        if p.len() != k || p.iter().any(|row| row.len() != l) {
            return Err(Error::ShapeMismatch(format!(
                "probability matrix must be {k} x {l}"
            )));
        }
        for row in &p {
            for &prob in row {
                if !(0.0..=1.0).contains(&prob) {
                    return Err(Error::InvalidParameter(format!(
                        "loop probability {prob} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(LowerBoundFamilySpec { k, l, gamma, p })
    }

    /// Number of state-action pairs of the generated MDP, `4*K*L`.
    pub fn n_pairs(&self) -> usize {
        4 * self.k * self.l
    }

    /// Closed-form optimal value of decision pair `(k, l)`:
    /// `1/(1 - gamma * p[k][l])`.
    pub fn closed_form_q_star(&self, k: usize, l: usize) -> f64 {
        assert!(k < self.k && l < self.l, "family index out of range");
        1.0 / (1.0 - self.gamma * self.p[k][l])
    }

    /// State id of the decision state `x_k`.
    pub fn x_state(&self, k: usize) -> usize {
        self.k * self.l + k
    }

    /// Flat pair index of decision pair `(k, l)` in the generated MDP.
    pub fn x_pair_index(&self, k: usize, l: usize) -> usize {
        // Entry states occupy the first K*L flat pairs.
        self.k * self.l + k * self.l + l
    }
}

/// Generate the family instance as a concrete MDP.
pub fn build_lower_bound_mdp(spec: &LowerBoundFamilySpec) -> Result<TabularMdp> {
    let (k, l) = (spec.k, spec.l);
    let kl = k * l;
    let num_states = 3 * kl + k;
    let entry = |ki: usize, li: usize| ki * l + li;
    let x = |ki: usize| kl + ki;
    let y = |ki: usize, li: usize| kl + k + ki * l + li;
    let z = |ki: usize, li: usize| kl + k + kl + ki * l + li;

    let one_hot = |target: usize| {
        let mut row = vec![0.0; num_states];
        row[target] = 1.0;
        row
    };
    let coin_row = |stay: usize, fall: usize, p: f64| {
        let mut row = vec![0.0; num_states];
        row[stay] += p;
        row[fall] += 1.0 - p;
        row
    };

    let mut actions = vec![Vec::new(); num_states];
    let mut transition = vec![Vec::new(); num_states];
    let mut reward = vec![Vec::new(); num_states];

    for ki in 0..k {
        for li in 0..l {
            let s = entry(ki, li);
            actions[s] = vec![0];
            transition[s] = vec![one_hot(x(ki))];
            reward[s] = vec![0.0];
        }
    }
    for ki in 0..k {
        let s = x(ki);
        actions[s] = (0..l).collect();
        transition[s] = (0..l)
            .map(|li| coin_row(y(ki, li), z(ki, li), spec.p[ki][li]))
            .collect();
        reward[s] = vec![1.0; l];
    }
    for ki in 0..k {
        for li in 0..l {
            let s = y(ki, li);
            actions[s] = vec![0];
            transition[s] = vec![coin_row(s, z(ki, li), spec.p[ki][li])];
            reward[s] = vec![1.0];
        }
    }
    for ki in 0..k {
        for li in 0..l {
            let s = z(ki, li);
            actions[s] = vec![0];
            transition[s] = vec![one_hot(s)];
            reward[s] = vec![0.0];
        }
    }

    let mdp = TabularMdp::new(num_states, actions, transition, reward, spec.gamma, 0)?;
    debug_assert_eq!(mdp.n_pairs(), spec.n_pairs());
    Ok(mdp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::exact_value_iteration;
    use approx::assert_abs_diff_eq;

    fn single(gamma: f64, p: f64) -> LowerBoundFamilySpec {
        LowerBoundFamilySpec::new(1, 1, gamma, vec![vec![p]]).unwrap()
    }

    #[test]
    fn smallest_instance_has_four_states_and_pairs() {
        let spec = single(0.9, 0.5);
        let mdp = build_lower_bound_mdp(&spec).unwrap();
        assert_eq!(mdp.num_states(), 4);
        assert_eq!(mdp.n_pairs(), 4);
        assert_eq!(spec.n_pairs(), 4);
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(
            single(0.9, 0.5).closed_form_q_star(0, 0),
            1.0 / 0.55,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            single(0.9, 0.0).closed_form_q_star(0, 0),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            single(0.99, 1.0).closed_form_q_star(0, 0),
            100.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn value_iteration_matches_closed_form() {
        let spec = single(0.9, 0.5);
        let mdp = build_lower_bound_mdp(&spec).unwrap();
        let q = exact_value_iteration(&mdp, 1e-9).unwrap();
        let pair = spec.x_pair_index(0, 0);
        assert_abs_diff_eq!(q.values[pair], 1.0 / (1.0 - 0.45), epsilon = 1e-8);
    }

    #[test]
    fn boundary_probabilities() {
        // p = 0: the action falls straight to the sink, Q = 1.
        let spec = single(0.9, 0.0);
        let mdp = build_lower_bound_mdp(&spec).unwrap();
        let q = exact_value_iteration(&mdp, 1e-10).unwrap();
        assert_abs_diff_eq!(q.values[spec.x_pair_index(0, 0)], 1.0, epsilon = 1e-9);

        // p = 1: the loop never exits, Q = 1/(1-gamma).
        let spec = single(0.9, 1.0);
        let mdp = build_lower_bound_mdp(&spec).unwrap();
        let q = exact_value_iteration(&mdp, 1e-10).unwrap();
        assert_abs_diff_eq!(q.values[spec.x_pair_index(0, 0)], 10.0, epsilon = 1e-8);
    }

    #[test]
    fn all_decision_pairs_match_closed_form() {
        let p = vec![vec![0.0, 0.3, 0.9], vec![1.0, 0.5, 0.7]];
        let spec = LowerBoundFamilySpec::new(2, 3, 0.95, p).unwrap();
        let mdp = build_lower_bound_mdp(&spec).unwrap();
        assert_eq!(mdp.n_pairs(), 24);
        let q = exact_value_iteration(&mdp, 1e-9).unwrap();
        for k in 0..2 {
            for l in 0..3 {
                let got = q.values[spec.x_pair_index(k, l)];
                let want = spec.closed_form_q_star(k, l);
                assert!(
                    (got - want).abs() <= 1e-8,
                    "(k={k}, l={l}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(LowerBoundFamilySpec::new(0, 1, 0.9, vec![]).is_err());
        assert!(LowerBoundFamilySpec::new(1, 1, 0.4, vec![vec![0.5]]).is_err());
        assert!(LowerBoundFamilySpec::new(1, 1, 0.9, vec![vec![1.5]]).is_err());
        assert!(LowerBoundFamilySpec::new(2, 1, 0.9, vec![vec![0.5]]).is_err());
    }
}
