//! TV-indistinguishable Q-function and policy estimation via the
//! multi-query Gaussian mechanism with `d = N`.
//!
//! The output distribution of a run is an isotropic Gaussian around
//! the plug-in estimate; two runs' distributions are close in TV
//! whenever both estimates meet their accuracy certificate, no matter
//! how the noise stream is implemented. The realized means and noise
//! scale are returned so a paired harness can evaluate the closed-form
//! KL certificate per trial.

use crate::divergence::GaussianVector;
use crate::error::Result;
use crate::gaussian::{gaussian_mechanism_with_sigma, GaussianMechanismParams};
use crate::mdp::{greedy_policy, Policy, QTable, TabularMdp};
use crate::sampling::GenerativeModel;
use crate::seed::SeedStream;

use super::plugin::{plugin_q_oracle, QOracleConfig};

/// A noisy Q-estimate together with its mechanism certificate data.
#[derive(Debug, Clone, PartialEq)]
pub struct TvIndQ {
    /// The noisy, clipped Q-table.
    pub q: QTable,
    /// The plug-in means the noise was added to (pre-clip density
    /// center).
    pub raw_means: Vec<f64>,
    /// Noise variance per coordinate.
    pub sigma_sq: f64,
    /// The mean-accuracy certificate the plug-in call was budgeted for.
    pub accuracy_target: f64,
}

impl TvIndQ {
    /// The pre-clip output density of this run.
    pub fn output_density(&self) -> GaussianVector {
        GaussianVector::new(self.raw_means.clone(), self.sigma_sq)
            .expect("density fields validated at construction")
    }
}

fn mechanism_config(
    mdp: &TabularMdp,
    params: &GaussianMechanismParams,
    target: f64,
) -> Result<QOracleConfig> {
    debug_assert_eq!(params.d(), mdp.n_pairs());
    QOracleConfig::new(target, params.delta() / 2.0)
}

/// Generator samples one [`tv_ind_q`] call draws.
pub fn tv_ind_q_budget(mdp: &TabularMdp, epsilon: f64, rho: f64, delta: f64) -> Result<u64> {
    let params = GaussianMechanismParams::new(epsilon, rho, delta, mdp.n_pairs())?;
    let cfg = mechanism_config(mdp, &params, params.mean_accuracy_target())?;
    Ok(cfg.total_budget(mdp.gamma(), mdp.n_pairs()))
}

pub(super) fn tv_ind_q_with_params(
    g: &mut GenerativeModel,
    params: &GaussianMechanismParams,
    target: f64,
    noise: &SeedStream,
) -> Result<TvIndQ> {
    let cfg = mechanism_config(g.mdp(), params, target)?;
    let raw = plugin_q_oracle(g, &cfg)?;
    let noisy = gaussian_mechanism_with_sigma(&raw.values, params.sigma_sq(), noise);
    let mut q = QTable { values: noisy };
    q.clip(g.mdp());
    Ok(TvIndQ {
        q,
        raw_means: raw.values,
        sigma_sq: params.sigma_sq(),
        accuracy_target: target,
    })
}

/// TV-indistinguishable Q-estimation: `eps`-optimal with probability
/// `1 - delta`; across two executions on independent data the expected
/// TV distance of the output distributions is at most `rho`. Requires
/// `delta < rho/5`.
pub fn tv_ind_q(
    g: &mut GenerativeModel,
    epsilon: f64,
    rho: f64,
    delta: f64,
    noise: &SeedStream,
) -> Result<TvIndQ> {
    let params = GaussianMechanismParams::new(epsilon, rho, delta, g.mdp().n_pairs())?;
    tv_ind_q_with_params(g, &params, params.mean_accuracy_target(), noise)
}

/// TV-indistinguishable policy estimation: greedy over a noisy Q-table
/// at accuracy `(1-gamma) eps`. The policy inherits the TV guarantee
/// by data processing.
pub fn tv_ind_policy(
    g: &mut GenerativeModel,
    epsilon: f64,
    rho: f64,
    delta: f64,
    noise: &SeedStream,
) -> Result<(Policy, TvIndQ)> {
    let q_accuracy = (1.0 - g.mdp().gamma()) * epsilon;
    let out = tv_ind_q(g, q_accuracy, rho, delta, noise)?;
    let policy = greedy_policy(g.mdp(), &out.q)?;
    Ok((policy, out))
}
