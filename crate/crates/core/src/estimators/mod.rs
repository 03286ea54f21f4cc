//! End-to-end Q-function and policy estimators under each
//! replicability notion.
//!
//! All estimators share the same two-phase shape: a non-replicable
//! plug-in estimate from generator samples, followed by a stabilizing
//! post-process — offset-grid rounding for exact replicability,
//! Gaussian noise for TV indistinguishability, the shared-randomness
//! coupling for exact replicability at lower sample cost, or a soft-max
//! map for approximate replicability. Every estimator exposes its
//! sample budget as a closed formula, and draws exactly that many
//! generator samples.

mod coupled;
mod evaluation;
mod plugin;
mod rounded;
mod softmax;
mod tv;

pub use coupled::{coupled_q_budget, replicable_q_via_coupling, CoupledQOptions};
pub use evaluation::{
    chain_reward, policy_chain_mdp, policy_evaluation_budget, replicable_policy_evaluation,
};
pub use plugin::{plugin_q_oracle, QOracleConfig, PLUGIN_SOLVER_TOL};
pub use rounded::{replicable_policy, replicable_q, replicable_q_budget};
pub use softmax::{
    approx_policy_budget, approx_replicable_policy, max_state_divergence, softmax_policy,
    SoftMaxParams,
};
pub use tv::{tv_ind_policy, tv_ind_q, tv_ind_q_budget, TvIndQ};
