//! Replicable statistical-query estimation by random-offset grid
//! rounding.
//!
//! The single-query oracle estimates a bounded mean and snaps it to a
//! uniform grid whose offset is drawn from the caller's internal
//! stream. Two executions on independent data share the offset, land in
//! the same grid cell unless their raw estimates straddle a boundary,
//! and therefore return the bit-identical value with probability at
//! least `1 - rho`.
//!
//! Parameter relations, for accuracy `eps`, replicability `rho`, and
//! confidence `delta` (with `delta < rho/3`):
//!
//! * raw accuracy demanded of the data: `eps' = eps(rho-2delta)/(rho+1-2delta)`
//! * grid width: `w = 2 eps' / (rho - 2delta)`
//! * sample budget (Hoeffding, pinned constant 2): `n = ceil(2 ln(1/delta) / eps'^2)`
//!
//! Rounding moves a point by at most `w/2`, so the total error is
//! `w/2 + eps' = eps`; two raw estimates within `eps'` of a common
//! truth cross a grid boundary with probability at most
//! `2 eps'/w = rho - 2delta` over the offset. The same relations drive
//! the multi-query variant, which gives every coordinate its own
//! offset from a coordinate-labelled sub-stream (so each output
//! coordinate consumes internal randomness addressed by its index
//! alone) and accepts an L1 certificate: per-coordinate boundary
//! crossings sum to at most `2 eps'/w` in total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedStream;

/// Accuracy / replicability / confidence triple for SQ estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqParams {
    epsilon: f64,
    rho: f64,
    delta: f64,
}

impl SqParams {
    pub fn new(epsilon: f64, rho: f64, delta: f64) -> Result<Self> {
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
        if !(delta > 0.0 && delta < rho / 3.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, rho/3) = (0, {}), got {delta}",
                rho / 3.0
            )));
        }
        Ok(SqParams {
            epsilon,
            rho,
            delta,
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

    /// Raw estimate accuracy `eps' = eps(rho-2delta)/(rho+1-2delta)`.
    pub fn raw_accuracy(&self) -> f64 {
        self.epsilon * (self.rho - 2.0 * self.delta) / (self.rho + 1.0 - 2.0 * self.delta)
    }

    /// Grid width `w = 2 eps'/(rho-2delta)`.
    pub fn grid_width(&self) -> f64 {
        2.0 * self.raw_accuracy() / (self.rho - 2.0 * self.delta)
    }

    /// Sample budget `ceil(2 ln(1/delta) / eps'^2)` for a `[0, 1]` mean.
    pub fn sample_budget(&self) -> usize {
        let eps1 = self.raw_accuracy();
        (2.0 * (1.0 / self.delta).ln() / (eps1 * eps1)).ceil() as usize
    }
}

/// A vector of query estimates with its parameters attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateVector {
    pub values: Vec<f64>,
    pub epsilon: f64,
    pub rho: f64,
    pub delta: f64,
}

impl EstimateVector {
    pub fn new(values: Vec<f64>, epsilon: f64, rho: f64, delta: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "estimate vector must be non-empty".to_string(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "estimate vector entries must be finite".to_string(),
            ));
        }
        Ok(EstimateVector {
            values,
            epsilon,
            rho,
            delta,
        })
    }

    pub fn from_sq(values: Vec<f64>, params: &SqParams) -> Result<Self> {
        Self::new(values, params.epsilon(), params.rho(), params.delta())
    }

    pub fn d(&self) -> usize {
        self.values.len()
    }
}

/// Snap `x` to the grid `{offset + k*w}`. Never moves a point by more
/// than `w/2`; ties round to even, which is deterministic.
pub fn snap_to_grid(x: f64, width: f64, offset: f64) -> f64 {
    debug_assert!(width > 0.0);
    offset + ((x - offset) / width).round() * width
}

/// Offset for coordinate `j`, drawn from its own labelled sub-stream.
fn coordinate_offset(internal: &SeedStream, j: u64, width: f64) -> f64 {
    internal.child_idx("coord", j).rng().uniform_f64() * width
}

/// Replicably estimate the mean of `[0, 1]` samples.
///
/// The internal stream must be dedicated to this call. Output is within
/// `eps` of the true mean with probability `1 - delta` given the budget
/// is met, and two executions on i.i.d. data sharing `internal` agree
/// bit-for-bit with probability at least `1 - rho`.
pub fn replicable_mean(samples: &[f64], params: &SqParams, internal: &SeedStream) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples given".to_string()));
    }
    let needed = params.sample_budget();
    if samples.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: samples.len(),
        });
    }
    if samples.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidParameter(
            "samples must lie in [0, 1]".to_string(),
        ));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let rounded = round_coordinates(&[mean], params, internal);
    Ok(rounded[0].clamp(0.0, 1.0))
}

fn round_coordinates(raw: &[f64], params: &SqParams, internal: &SeedStream) -> Vec<f64> {
    let width = params.grid_width();
    raw.iter()
        .enumerate()
        .map(|(j, &x)| snap_to_grid(x, width, coordinate_offset(internal, j as u64, width)))
        .collect()
}

/// Replicable multi-query rounding.
///
/// The caller certifies that `raw` is within `l1_accuracy` of the truth
/// in L1 norm with probability `1 - delta`, where `l1_accuracy` must
/// not exceed `params.raw_accuracy()`. Each coordinate is snapped on
/// its own offset grid; when the certificate holds in both runs, the
/// full output vectors agree with probability at least `1 - rho`, and
/// each coordinate is within `eps` of its true value. `clip` optionally
/// clamps the rounded outputs to a feasible range (pass `(0.0, 1.0)`
/// for `[0, 1]`-valued queries).
pub fn replicable_round_vector(
    raw: &[f64],
    l1_accuracy: f64,
    params: &SqParams,
    internal: &SeedStream,
    clip: Option<(f64, f64)>,
) -> Result<EstimateVector> {
    if raw.is_empty() {
        return Err(Error::InvalidParameter(
            "raw estimate vector must be non-empty".to_string(),
        ));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "raw estimates must be finite".to_string(),
        ));
    }
    // SqParams already guarantees rho > 3 delta > 2 delta, so the width
    // formula cannot degenerate; still reject a certificate looser than
    // the one the accuracy guarantee needs.
    if !(l1_accuracy > 0.0) || l1_accuracy > params.raw_accuracy() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "L1 certificate {l1_accuracy} exceeds the required raw accuracy {}",
            params.raw_accuracy()
        )));
    }
    let mut values = round_coordinates(raw, params, internal);
    if let Some((lo, hi)) = clip {
        for v in &mut values {
            *v = v.clamp(lo, hi);
        }
    }
    EstimateVector::from_sq(values, params)
}
