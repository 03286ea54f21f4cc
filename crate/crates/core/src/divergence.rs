//! Dissimilarity measures on finite distributions and isotropic
//! Gaussians: total variation, Renyi/KL divergence, the Pinsker bound,
//! and the exact 1-d Gaussian TV used as a coupling test oracle.
//!
//! TV follows the sup/coupling convention `sup_A P(A) - Q(A) =
//! (1/2)||P - Q||_1`, which is the formulation the coupling identity
//! `inf P{X != Y}` forces.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// A probability vector over a finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    probs: Vec<f64>,
}

impl FiniteDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter(
                "distribution needs a non-empty support".to_string(),
            ));
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !(p >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative probability {p}")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}, want 1"
            )));
        }
        Ok(FiniteDist { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        FiniteDist::new(vec![1.0 - p, p])
    }
}

/// An isotropic Gaussian vector: mean in `R^d`, one shared variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianVector {
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl GaussianVector {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::InvalidParameter(
                "Gaussian vector needs dimension >= 1".to_string(),
            ));
        }
        if !(variance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "variance must be positive, got {variance}"
            )));
        }
        Ok(GaussianVector { mean, variance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Renyi order: a finite `alpha >= 1` or the max-ratio limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenyiOrder {
    Alpha(f64),
    Infinity,
}

impl std::fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenyiOrder::Alpha(a) => write!(f, "{a}"),
            RenyiOrder::Infinity => write!(f, "inf"),
        }
    }
}

/// Total variation distance between two finite distributions with the
/// same support size: `(1/2) sum |p_i - q_i|`.
pub fn tv_finite(p: &FiniteDist, q: &FiniteDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "supports of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(p.probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0)
}

/// Renyi divergence `D_alpha(P || Q)`.
///
/// `alpha = 1` is the KL limit, `alpha = inf` the log max-ratio. A
/// violation of absolute continuity (`q_i = 0 < p_i`) returns
/// `f64::INFINITY` rather than an error.
pub fn renyi_finite(p: &FiniteDist, q: &FiniteDist, order: RenyiOrder) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "supports of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    if let RenyiOrder::Alpha(a) = order {
        if !(a >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Renyi order must satisfy alpha >= 1, got {a}"
            )));
        }
    }
    let pairs = p.probs.iter().zip(&q.probs);
    let value = match order {
        RenyiOrder::Infinity => {
            let mut max_ratio = 0.0f64;
            for (&pi, &qi) in pairs {
                if pi > 0.0 {
                    if qi == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    max_ratio = max_ratio.max(pi / qi);
                }
            }
            max_ratio.ln()
        }
        RenyiOrder::Alpha(a) if (a - 1.0).abs() < 1e-12 => {
            let mut kl = 0.0;
            for (&pi, &qi) in pairs {
                if pi > 0.0 {
                    if qi == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    kl += pi * (pi / qi).ln();
                }
            }
            kl
        }
        RenyiOrder::Alpha(a) => {
            let mut sum = 0.0;
            for (&pi, &qi) in pairs {
                if pi > 0.0 {
                    if qi == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    sum += pi.powf(a) * qi.powf(1.0 - a);
                }
            }
            sum.ln() / (a - 1.0)
        }
    };
    // Rounding can push an exact zero marginally negative.
    Ok(value.max(0.0))
}

/// KL divergence between equal-variance isotropic Gaussians:
/// `||mu_p - mu_q||^2 / (2 sigma^2)`.
pub fn kl_gaussian_isotropic(p: &GaussianVector, q: &GaussianVector) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::ShapeMismatch(format!(
            "dimensions {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    if p.variance != q.variance {
        return Err(Error::InvalidParameter(
            "KL requires equal variances; the general case is unsupported".to_string(),
        ));
    }
    let sq: f64 = p
        .mean
        .iter()
        .zip(&q.mean)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sq / (2.0 * p.variance))
}

/// Pinsker's inequality as a function: `TV <= sqrt(KL/2)`, capped at 1.
pub fn tv_upper_bound_pinsker(kl: f64) -> f64 {
    assert!(kl >= 0.0, "KL must be non-negative");
    (kl / 2.0).sqrt().min(1.0)
}

/// Standard normal CDF.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Exact total variation between two 1-d Gaussians with equal variance:
/// `2 Phi(|dmu| / (2 sigma)) - 1`.
pub fn tv_gaussian_1d(p: &GaussianVector, q: &GaussianVector) -> Result<f64> {
    if p.dim() != 1 || q.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            dim: p.dim().max(q.dim()),
            max: 1,
        });
    }
    if p.variance != q.variance {
        return Err(Error::InvalidParameter(
            "exact TV requires equal variances".to_string(),
        ));
    }
    let delta = (p.mean[0] - q.mean[0]).abs();
    Ok(2.0 * standard_normal_cdf(delta / (2.0 * p.sigma())) - 1.0)
}

/// Exact TV between equal-variance isotropic Gaussians in any
/// dimension. The difference of means is the only informative
/// direction, so this reduces to the 1-d formula at `||dmu||_2`.
pub fn tv_gaussian_isotropic(p: &GaussianVector, q: &GaussianVector) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::ShapeMismatch(format!(
            "dimensions {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    if p.variance != q.variance {
        return Err(Error::InvalidParameter(
            "exact TV requires equal variances".to_string(),
        ));
    }
    let delta: f64 = p
        .mean
        .iter()
        .zip(&q.mean)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(2.0 * standard_normal_cdf(delta / (2.0 * p.sigma())) - 1.0)
}
