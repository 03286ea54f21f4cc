//! Generative-model access with exact sample accounting.
//!
//! A [`GenerativeModel`] binds an MDP to an *external* random stream
//! (the data source) and counts every transition draw in a
//! [`SampleLedger`]. Estimators declare their sample budgets as closed
//! formulas; tests hold the ledger to those formulas exactly, so an
//! estimator cannot silently overdraw.
//!
//! External streams (data) and internal streams (algorithm randomness)
//! must never share a derivation path; the paired-run harness derives
//! them under distinct labels from a per-trial stream.

use crate::error::{Error, Result};
use crate::mdp::{Policy, TabularMdp};
use crate::seed::{SeedStream, StreamRng};

/// Per-pair draw counts plus their total.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampleLedger {
    per_pair: Vec<u64>,
    total: u64,
}

impl SampleLedger {
    pub fn new(n_pairs: usize) -> Self {
        SampleLedger {
            per_pair: vec![0; n_pairs],
            total: 0,
        }
    }

    pub fn record(&mut self, pair: usize) {
        self.per_pair[pair] += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, pair: usize) -> u64 {
        self.per_pair[pair]
    }

    pub fn per_pair(&self) -> &[u64] {
        &self.per_pair
    }

    /// Merge another shard into this one. Associative and commutative,
    /// so parallel workers can combine shards in any order.
    pub fn merge(&mut self, other: &SampleLedger) {
        assert_eq!(self.per_pair.len(), other.per_pair.len());
        for (a, b) in self.per_pair.iter_mut().zip(&other.per_pair) {
            *a += b;
        }
        self.total += other.total;
    }
}

/// Sampling access to an MDP's transition kernel.
pub struct GenerativeModel<'a> {
    mdp: &'a TabularMdp,
    rng: StreamRng,
    ledger: SampleLedger,
    stream_path: String,
}

impl<'a> GenerativeModel<'a> {
    /// Bind `mdp` to the external stream `external`.
    pub fn new(mdp: &'a TabularMdp, external: &SeedStream) -> Self {
        GenerativeModel {
            mdp,
            rng: external.rng(),
            ledger: SampleLedger::new(mdp.n_pairs()),
            stream_path: external.path_string(),
        }
    }

    pub fn mdp(&self) -> &TabularMdp {
        self.mdp
    }

    pub fn ledger(&self) -> &SampleLedger {
        &self.ledger
    }

    pub fn stream_path(&self) -> &str {
        &self.stream_path
    }

    /// Draw a next state from `P(. | s, a)` by inverse CDF over the
    /// transition row in fixed state order, and charge the ledger.
    pub fn sample_transition(&mut self, s: usize, action_idx: usize) -> Result<usize> {
        if s >= self.mdp.num_states() || action_idx >= self.mdp.actions(s).len() {
            return Err(Error::ShapeMismatch(format!(
                "state {s} / action index {action_idx} out of range"
            )));
        }
        let pair = self.mdp.pair_index(s, action_idx);
        let row = self.mdp.transition_row(pair);
        let u = self.rng.uniform_f64();
        self.ledger.record(pair);
        Ok(inverse_cdf(row, u))
    }

    /// Draw an action from `pi(s)` and then a transition under it,
    /// charging a single generator sample. This is how a policy-induced
    /// single-action chain is sampled.
    pub fn sample_policy_transition(&mut self, policy: &Policy, s: usize) -> Result<usize> {
        let action_idx = match policy {
            Policy::Deterministic { actions } => {
                let id = actions[s];
                self.mdp
                    .actions(s)
                    .iter()
                    .position(|&a| a == id)
                    .ok_or_else(|| {
                        Error::ShapeMismatch(format!("action id {id} not available in state {s}"))
                    })?
            }
            Policy::Stochastic { rows } => {
                let u = self.rng.uniform_f64();
                inverse_cdf(&rows[s], u)
            }
        };
        self.sample_transition(s, action_idx)
    }
}

/// Index of the first cumulative-sum bucket exceeding `u`. Buckets with
/// zero mass are never selected.
fn inverse_cdf(row: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last_positive = i;
            if u < cum {
                return i;
            }
        }
    }
    // Rounding can leave cum marginally below 1; charge the last bucket.
    last_positive
}

/// One Bernoulli draw with bias `p` from a dedicated stream sampler.
pub fn draw_coin(rng: &mut StreamRng, p: f64) -> Result<u8> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "coin bias {p} outside [0, 1]"
        )));
    }
    Ok(u8::from(rng.bernoulli(p)))
}
