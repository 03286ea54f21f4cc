//! Exactly replicable Q-function and policy estimation by rounding.
//!
//! The plug-in oracle is called at per-coordinate accuracy `eps'/N`, so
//! the estimate is within `eps'` of `Q*` in L1 norm, and the
//! multi-query rounding post-process then makes the table replicable.
//! A policy estimate is the greedy policy of a replicable Q-table at
//! accuracy `(1-gamma) eps`: equal rounded tables give equal greedy
//! policies under the fixed tie-break.

use crate::error::Result;
use crate::mdp::{greedy_policy, Policy, QTable, TabularMdp};
use crate::sampling::GenerativeModel;
use crate::seed::SeedStream;
use crate::sq::{replicable_round_vector, SqParams};

use super::plugin::{plugin_q_oracle, QOracleConfig};

fn oracle_config(mdp: &TabularMdp, params: &SqParams) -> Result<QOracleConfig> {
    let per_coord = params.raw_accuracy() / mdp.n_pairs() as f64;
    QOracleConfig::new(per_coord, params.delta())
}

/// Generator samples one [`replicable_q`] call draws.
pub fn replicable_q_budget(mdp: &TabularMdp, epsilon: f64, rho: f64, delta: f64) -> Result<u64> {
    let params = SqParams::new(epsilon, rho, delta)?;
    Ok(oracle_config(mdp, &params)?.total_budget(mdp.gamma(), mdp.n_pairs()))
}

/// Replicable estimation of `Q*`: `eps`-optimal with probability
/// `1 - delta`, and bit-identical across two executions sharing
/// `internal` with probability at least `1 - rho`. Requires
/// `delta < rho/3`.
pub fn replicable_q(
    g: &mut GenerativeModel,
    epsilon: f64,
    rho: f64,
    delta: f64,
    internal: &SeedStream,
) -> Result<QTable> {
    let params = SqParams::new(epsilon, rho, delta)?;
    let cfg = oracle_config(g.mdp(), &params)?;
    let raw = plugin_q_oracle(g, &cfg)?;
    let rounded = replicable_round_vector(
        &raw.values,
        params.raw_accuracy(),
        &params,
        internal,
        Some((0.0, g.mdp().value_range())),
    )?;
    Ok(QTable {
        values: rounded.values,
    })
}

/// Replicable estimation of an `eps`-optimal policy: greedy over a
/// replicable Q-table at accuracy `(1-gamma) eps`.
pub fn replicable_policy(
    g: &mut GenerativeModel,
    epsilon: f64,
    rho: f64,
    delta: f64,
    internal: &SeedStream,
) -> Result<Policy> {
    let q_accuracy = (1.0 - g.mdp().gamma()) * epsilon;
    let q = replicable_q(g, q_accuracy, rho, delta, internal)?;
    greedy_policy(g.mdp(), &q)
}
