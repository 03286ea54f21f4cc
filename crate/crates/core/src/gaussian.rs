//! The multi-query Gaussian mechanism.
//!
//! Given `d` mean estimates that are accurate to the certified target,
//! the mechanism adds i.i.d. Gaussian noise of variance
//! `sigma^2 = eps^2 / (8 ln(4d/delta))` per coordinate. All coordinates
//! land within `eps` of their true values with probability `1 - delta`,
//! and across two executions whose mean vectors differ by at most twice
//! the accuracy target per coordinate, the closed-form KL between the
//! two output densities is at most `rho^2`, hence their TV distance at
//! most `rho/sqrt(2)`.

use serde::{Deserialize, Serialize};

use crate::divergence::GaussianVector;
use crate::error::{Error, Result};
use crate::seed::SeedStream;
use crate::sq::EstimateVector;

/// Parameters of the mechanism for `d` queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMechanismParams {
    epsilon: f64,
    rho: f64,
    delta: f64,
    d: usize,
}

impl GaussianMechanismParams {
    pub fn new(epsilon: f64, rho: f64, delta: f64, d: usize) -> Result<Self> {
        let params = Self::relaxed(epsilon, rho, delta, d)?;
        if delta >= rho / 5.0 {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, rho/5) = (0, {}), got {delta}",
                rho / 5.0
            )));
        }
        Ok(params)
    }

    /// Like [`new`](Self::new) but without the `delta < rho/5` link.
    /// Compositions that run the mechanism at `rho/2` on behalf of an
    /// outer guarantee validate the link at their own level.
    pub(crate) fn relaxed(epsilon: f64, rho: f64, delta: f64, d: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in (0, 1), got {rho}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParameter(
                "query count d must be positive".to_string(),
            ));
        }
        Ok(GaussianMechanismParams {
            epsilon,
            rho,
            delta,
            d,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn log_term(&self) -> f64 {
        (4.0 * self.d as f64 / self.delta).ln()
    }

    /// Noise variance `eps^2 / (8 ln(4d/delta))`.
    pub fn sigma_sq(&self) -> f64 {
        self.epsilon * self.epsilon / (8.0 * self.log_term())
    }

    /// Mean accuracy the caller must certify:
    /// `eps rho / (2 sqrt(8 d ln(4d/delta)))`.
    pub fn mean_accuracy_target(&self) -> f64 {
        self.epsilon * self.rho / (2.0 * (8.0 * self.d as f64 * self.log_term()).sqrt())
    }

    /// Tighter target used when the output is drawn through the shared
    /// coupling at TV parameter `rho/2`:
    /// `eps rho / (4 sqrt(8 d ln(4d/delta)))`.
    pub fn coupled_mean_accuracy_target(&self) -> f64 {
        self.mean_accuracy_target() / 2.0
    }

    /// Per-query sample budget for a `[0, 1]` mean query at accuracy
    /// `target`: `ceil(2 ln(4d/delta) / target^2)` (Hoeffding with the
    /// pinned constant 2; a union bound over the `d` queries is already
    /// inside the log term).
    pub fn per_query_budget(&self, target: f64) -> u64 {
        assert!(target > 0.0);
        (2.0 * self.log_term() / (target * target)).ceil() as u64
    }

    /// The output density around a realized mean vector.
    pub fn output_density(&self, mean: Vec<f64>) -> Result<GaussianVector> {
        if mean.len() != self.d {
            return Err(Error::ShapeMismatch(format!(
                "mean vector has {} entries, want d = {}",
                mean.len(),
                self.d
            )));
        }
        GaussianVector::new(mean, self.sigma_sq())
    }
}

/// Add i.i.d. Gaussian noise of variance `sigma_sq` to `means`, drawing
/// from `internal`. This is the raw primitive; `sigma_sq` may be floored
/// to a tiny value for diagnostics.
pub fn gaussian_mechanism_with_sigma(
    means: &[f64],
    sigma_sq: f64,
    internal: &SeedStream,
) -> Vec<f64> {
    assert!(sigma_sq > 0.0);
    let sigma = sigma_sq.sqrt();
    let mut rng = internal.child("noise").rng();
    means.iter().map(|&m| rng.gaussian(m, sigma)).collect()
}

/// The mechanism proper: noise calibrated by `params`.
///
/// The caller certifies that `query_means` is within
/// `params.mean_accuracy_target()` of the true query values in every
/// coordinate with probability `1 - delta/2`.
pub fn gaussian_mechanism(
    query_means: &[f64],
    params: &GaussianMechanismParams,
    internal: &SeedStream,
) -> Result<EstimateVector> {
    if query_means.len() != params.d() {
        return Err(Error::ShapeMismatch(format!(
            "got {} means for d = {} queries",
            query_means.len(),
            params.d()
        )));
    }
    let noisy = gaussian_mechanism_with_sigma(query_means, params.sigma_sq(), internal);
    EstimateVector::new(noisy, params.epsilon(), params.rho(), params.delta())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{kl_gaussian_isotropic, tv_upper_bound_pinsker};
    use crate::seed::SeedStream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_bad_params() {
        assert!(GaussianMechanismParams::new(0.2, 0.3, 0.05, 4).is_ok());
        assert!(GaussianMechanismParams::new(0.2, 0.3, 0.06, 4).is_err()); // delta >= rho/5
        assert!(GaussianMechanismParams::new(0.0, 0.3, 0.05, 4).is_err());
        assert!(GaussianMechanismParams::new(0.2, 0.3, 0.05, 0).is_err());
    }

    #[test]
    fn noise_moments_match_sigma() {
        // d = 1, mean 0.5, eps = 0.2, delta = 0.01: the outputs have
        // mean ~0.5 and variance ~eps^2/(8 ln 400).
        let params = GaussianMechanismParams::new(0.2, 0.2, 0.01, 1).unwrap();
        let want_var = 0.2 * 0.2 / (8.0 * (400.0f64).ln());
        assert_abs_diff_eq!(params.sigma_sq(), want_var, epsilon = 1e-15);

        let n = 100_000;
        let root = SeedStream::from_root(51);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n {
            let out = gaussian_mechanism(&[0.5], &params, &root.child_idx("run", i)).unwrap();
            sum += out.values[0];
            sumsq += out.values[0] * out.values[0];
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        assert!((var - want_var).abs() < 0.1 * want_var, "var {var}");
    }

    #[test]
    fn tiny_sigma_diagnostic_recovers_means() {
        let means = [0.3, 0.7, 0.1];
        let internal = SeedStream::from_root(52).child("internal");
        let out = gaussian_mechanism_with_sigma(&means, 1e-18, &internal);
        for (o, m) in out.iter().zip(&means) {
            assert!((o - m).abs() < 1e-8);
        }
    }

    #[test]
    fn kl_at_certified_gap_is_within_rho_squared() {
        // Two runs whose means differ by exactly twice the accuracy
        // target per coordinate: the closed-form KL between the output
        // densities stays below rho^2 and Pinsker gives TV <= rho/sqrt(2).
        let params = GaussianMechanismParams::new(0.2, 0.3, 0.05, 4).unwrap();
        let t = params.mean_accuracy_target();
        let mu1 = vec![0.5 - t, 0.4 - t, 0.6 - t, 0.3 - t];
        let mu2 = vec![0.5 + t, 0.4 + t, 0.6 + t, 0.3 + t];
        let p = params.output_density(mu1).unwrap();
        let q = params.output_density(mu2).unwrap();
        let kl = kl_gaussian_isotropic(&p, &q).unwrap();
        assert!(kl <= 0.3 * 0.3 + 1e-12, "kl {kl}");
        assert!(tv_upper_bound_pinsker(kl) <= 0.3 / std::f64::consts::SQRT_2 + 1e-12);
    }

    #[test]
    fn same_stream_same_output() {
        let params = GaussianMechanismParams::new(0.2, 0.3, 0.05, 2).unwrap();
        let internal = SeedStream::from_root(53).child("internal");
        let a = gaussian_mechanism(&[0.2, 0.8], &params, &internal).unwrap();
        let b = gaussian_mechanism(&[0.2, 0.8], &params, &internal).unwrap();
        assert_eq!(a, b);
    }
}
