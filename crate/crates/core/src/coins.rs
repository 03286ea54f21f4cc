//! The multiple-coin identification harness.
//!
//! `N` independent coins each have bias `q` or `q - eps` (with
//! `q - eps > 1/2`); the task is to label every coin. The naive
//! midpoint-threshold classifier is correct but unstable: when a bias
//! lands near the threshold, two executions on fresh flips disagree
//! with probability that decays only like `1/sqrt(m)`. The replicable
//! classifier thresholds a rounded mean per coin with per-coin
//! parameters `(eps/2, rho/N, delta/N)` and per-coin internal
//! sub-streams, which restores stable outputs at a polynomial sample
//! cost in `N`.
//!
//! The acceptance-curve diagnostic estimates `Acc(p) = P{classifier
//! says +}` over a grid of biases for a classifier with a fixed
//! internal realization; its maximum slope is bounded by
//! `sqrt(m / (p(1-p)))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedStream;
use crate::sq::{replicable_mean, SqParams};

/// Parameters of one coin-identification problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinProblemSpec {
    pub n_coins: usize,
    /// Upper bias.
    pub q: f64,
    /// Gap between the two bias classes.
    pub epsilon: f64,
    /// Per-problem confidence target.
    pub delta: f64,
    /// Flips per coin for the naive classifier.
    pub per_coin_budget: usize,
    /// True bias of each coin, all in `[q - eps, q]`.
    pub true_biases: Vec<f64>,
}

impl CoinProblemSpec {
    pub fn new(
        n_coins: usize,
        q: f64,
        epsilon: f64,
        delta: f64,
        per_coin_budget: usize,
        true_biases: Vec<f64>,
    ) -> Result<Self> {
        if n_coins == 0 || per_coin_budget == 0 {
            return Err(Error::InvalidParameter(
                "coin count and budget must be positive".to_string(),
            ));
        }
        if !(q < 1.0 && q - epsilon > 0.5) {
            return Err(Error::InvalidParameter(format!(
                "need q - eps in (1/2, 1): q = {q}, eps = {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if true_biases.len() != n_coins {
            return Err(Error::ShapeMismatch(format!(
                "{} biases for {n_coins} coins",
                true_biases.len()
            )));
        }
        let tol = 1e-12;
        if true_biases
            .iter()
            .any(|&p| p < q - epsilon - tol || p > q + tol)
        {
            return Err(Error::InvalidParameter(
                "every bias must lie in [q - eps, q]".to_string(),
            ));
        }
        Ok(CoinProblemSpec {
            n_coins,
            q,
            epsilon,
            delta,
            per_coin_budget,
            true_biases,
        })
    }

    /// Classification threshold, the midpoint `q - eps/2`.
    pub fn threshold(&self) -> f64 {
        self.q - self.epsilon / 2.0
    }
}

fn flip_coin_mean(p: f64, m: usize, stream: &SeedStream) -> f64 {
    let mut rng = stream.rng();
    let mut sum = 0u64;
    for _ in 0..m {
        sum += u64::from(rng.bernoulli(p));
    }
    sum as f64 / m as f64
}

/// The naive baseline: label `+` iff the sample mean of
/// `per_coin_budget` flips clears the midpoint threshold. Data for
/// coin `i` comes from `external.child_idx("coin", i)`.
pub fn naive_coin_classifier(spec: &CoinProblemSpec, external: &SeedStream) -> Vec<bool> {
    (0..spec.n_coins)
        .map(|i| {
            let mean = flip_coin_mean(
                spec.true_biases[i],
                spec.per_coin_budget,
                &external.child_idx("coin", i as u64),
            );
            mean > spec.threshold()
        })
        .collect()
}

/// Per-coin flip budget of the replicable classifier: the rounded-mean
/// rule at `(eps/2, rho/N, delta/N)`.
pub fn replicable_coin_budget(spec: &CoinProblemSpec, rho: f64) -> Result<u64> {
    let params = per_coin_params(spec, rho)?;
    Ok(params.sample_budget() as u64)
}

fn per_coin_params(spec: &CoinProblemSpec, rho: f64) -> Result<SqParams> {
    let n = spec.n_coins as f64;
    SqParams::new(spec.epsilon / 2.0, rho / n, spec.delta / n)
}

/// The replicable classifier: a rounded mean per coin, each with its
/// own internal sub-stream, thresholded at the midpoint. The union
/// bound over coins is folded into the per-coin parameters, so the
/// full label vector agrees across paired executions with probability
/// at least `1 - rho`.
pub fn replicable_coin_classifier(
    spec: &CoinProblemSpec,
    rho: f64,
    external: &SeedStream,
    internal: &SeedStream,
) -> Result<Vec<bool>> {
    let params = per_coin_params(spec, rho)?;
    let m = params.sample_budget();
    let mut labels = Vec::with_capacity(spec.n_coins);
    for i in 0..spec.n_coins {
        let stream = external.child_idx("coin", i as u64);
        let mut rng = stream.rng();
        let samples: Vec<f64> = (0..m)
            .map(|_| f64::from(rng.bernoulli(spec.true_biases[i])))
            .collect();
        let rounded = replicable_mean(&samples, &params, &internal.child_idx("coin", i as u64))?;
        labels.push(rounded > spec.threshold());
    }
    Ok(labels)
}

/// One grid point of an acceptance curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptancePoint {
    pub p: f64,
    pub acc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// An estimated acceptance curve with its steepest observed secant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptanceCurve {
    pub points: Vec<AcceptancePoint>,
    pub m: usize,
    pub trials: u32,
    pub max_slope: f64,
}

/// Estimate `Acc(p)` of a fixed single-coin classifier over a bias
/// grid by Monte Carlo. The classifier must be deterministic in the
/// flips (any internal realization fixed up front); fresh flips come
/// from `external`.
pub fn acceptance_curve(
    classify: impl Fn(&[u8]) -> bool,
    grid: &[f64],
    m: usize,
    trials: u32,
    external: &SeedStream,
) -> Result<AcceptanceCurve> {
    if grid.is_empty() || m == 0 || trials == 0 {
        return Err(Error::InvalidParameter(
            "grid, m, and trials must be non-empty".to_string(),
        ));
    }
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParameter(
            "grid biases must lie in [0, 1]".to_string(),
        ));
    }
    let mut points = Vec::with_capacity(grid.len());
    for (gi, &p) in grid.iter().enumerate() {
        let mut accepts = 0u32;
        let mut flips = vec![0u8; m];
        for t in 0..trials {
            let mut rng = external
                .child_idx("grid", gi as u64)
                .child_idx("trial", u64::from(t))
                .rng();
            for f in &mut flips {
                *f = u8::from(rng.bernoulli(p));
            }
            if classify(&flips) {
                accepts += 1;
            }
        }
        let acc = f64::from(accepts) / f64::from(trials);
        let (ci_low, ci_high) = crate::harness::wilson_interval(accepts, trials);
        points.push(AcceptancePoint {
            p,
            acc,
            ci_low,
            ci_high,
        });
    }
    let max_slope = points
        .windows(2)
        .map(|w| (w[1].acc - w[0].acc).abs() / (w[1].p - w[0].p).abs())
        .fold(0.0, f64::max);
    Ok(AcceptanceCurve {
        points,
        m,
        trials,
        max_slope,
    })
}

/// Probability that the naive classifier labels one coin differently
/// across two executions when the bias itself is drawn uniformly from
/// `[q - eps, q]`, estimated over `trials` draws of `(p, flips,
/// flips')`.
pub fn naive_paired_inconsistency(
    q: f64,
    epsilon: f64,
    m: usize,
    trials: u32,
    root: &SeedStream,
) -> f64 {
    let threshold = q - epsilon / 2.0;
    let mut differs = 0u32;
    for t in 0..trials {
        let trial = root.child_idx("trial", u64::from(t));
        let p = trial.child("bias").rng().uniform_range(q - epsilon, q);
        let a = flip_coin_mean(p, m, &trial.child("flips-a")) > threshold;
        let b = flip_coin_mean(p, m, &trial.child("flips-b")) > threshold;
        if a != b {
            differs += 1;
        }
    }
    f64::from(differs) / f64::from(trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, m: usize) -> CoinProblemSpec {
        let biases = (0..n).map(|i| if i % 2 == 0 { 0.9 } else { 0.7 }).collect();
        CoinProblemSpec::new(n, 0.9, 0.2, 0.1, m, biases).unwrap()
    }

    #[test]
    fn validation() {
        assert!(CoinProblemSpec::new(1, 0.6, 0.2, 0.1, 10, vec![0.5]).is_err()); // q-eps <= 1/2
        assert!(CoinProblemSpec::new(1, 1.0, 0.2, 0.1, 10, vec![0.9]).is_err()); // q = 1
        assert!(CoinProblemSpec::new(1, 0.9, 0.2, 0.1, 10, vec![0.3]).is_err()); // bias outside
        assert!(spec(4, 100).threshold() == 0.8);
    }

    #[test]
    fn naive_classifier_confident_at_boundary_biases() {
        // Large m: a coin at q is + and a coin at q - eps is -, nearly
        // always.
        let s = spec(2, 20_000);
        let root = SeedStream::from_root(130);
        let mut plus = 0;
        let mut minus = 0;
        for t in 0..50 {
            let labels = naive_coin_classifier(&s, &root.child_idx("run", t));
            plus += u32::from(labels[0]);
            minus += u32::from(!labels[1]);
        }
        assert!(plus >= 49, "{plus}");
        assert!(minus >= 49, "{minus}");
    }

    #[test]
    fn naive_classifier_is_a_fair_coin_at_threshold() {
        // Bias exactly at the midpoint: paired runs agree about half
        // the time per coin.
        let s = CoinProblemSpec::new(1, 0.9, 0.2, 0.1, 400, vec![0.8]).unwrap();
        let root = SeedStream::from_root(131);
        let mut differ = 0;
        let trials = 2000;
        for t in 0..trials {
            let a = naive_coin_classifier(&s, &root.child_idx("a", t));
            let b = naive_coin_classifier(&s, &root.child_idx("b", t));
            if a != b {
                differ += 1;
            }
        }
        let rate = differ as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 0.05, "disagreement rate {rate}");
    }

    #[test]
    fn naive_full_vector_agreement_decays_with_n() {
        // Biases drawn uniformly in [q - eps, q]: the probability that
        // all N labels agree across paired runs falls as N grows.
        let root = SeedStream::from_root(132);
        let mut rates = Vec::new();
        for (ni, &n) in [1usize, 4, 16].iter().enumerate() {
            let trials = 400;
            let mut agree = 0;
            for t in 0..trials {
                let trial = root.child_idx("n", ni as u64).child_idx("trial", t);
                let mut bias_rng = trial.child("biases").rng();
                let biases: Vec<f64> = (0..n).map(|_| bias_rng.uniform_range(0.7, 0.9)).collect();
                let s = CoinProblemSpec::new(n, 0.9, 0.2, 0.1, 100, biases).unwrap();
                let a = naive_coin_classifier(&s, &trial.child("a"));
                let b = naive_coin_classifier(&s, &trial.child("b"));
                if a == b {
                    agree += 1;
                }
            }
            rates.push(agree as f64 / trials as f64);
        }
        assert!(
            rates[0] > rates[1] && rates[1] > rates[2],
            "agreement rates {rates:?}"
        );
    }

    #[test]
    fn replicable_classifier_correct_at_boundary_biases() {
        // Boundary biases: labels are correct per coin at the delta
        // level.
        let s = spec(3, 1);
        let rho = 0.5;
        let root = SeedStream::from_root(133);
        let trials = 150;
        let mut correct = 0u32;
        let mut checks = 0u32;
        for t in 0..trials {
            let trial = root.child_idx("trial", t);
            let labels =
                replicable_coin_classifier(&s, rho, &trial.child("ext"), &trial.child("int"))
                    .unwrap();
            for (i, &l) in labels.iter().enumerate() {
                checks += 1;
                let want = s.true_biases[i] > s.threshold();
                correct += u32::from(l == want);
            }
        }
        let rate = f64::from(correct) / f64::from(checks);
        assert!(rate >= 1.0 - s.delta, "per-coin correctness {rate}");
    }

    #[test]
    fn replicable_classifier_paired_agreement_with_interior_biases() {
        // N = 5, rho = 0.5, biases anywhere in the interval: full
        // vector agreement at least 1 - rho minus MC slack.
        let rho = 0.5;
        let root = SeedStream::from_root(134);
        let trials = 150;
        let mut agree = 0;
        for t in 0..trials {
            let trial = root.child_idx("trial", t);
            let mut bias_rng = trial.child("biases").rng();
            let biases: Vec<f64> = (0..5).map(|_| bias_rng.uniform_range(0.7, 0.9)).collect();
            let s = CoinProblemSpec::new(5, 0.9, 0.2, 0.1, 1, biases).unwrap();
            let internal = trial.child("int");
            let a = replicable_coin_classifier(&s, rho, &trial.child("ext-a"), &internal).unwrap();
            let b = replicable_coin_classifier(&s, rho, &trial.child("ext-b"), &internal).unwrap();
            if a == b {
                agree += 1;
            }
        }
        let rate = agree as f64 / trials as f64;
        assert!(rate >= 1.0 - rho - 0.1, "agreement {rate}");
    }

    #[test]
    fn identical_data_and_streams_identical_labels() {
        let s = spec(3, 1);
        let trial = SeedStream::from_root(135).child("t");
        let a =
            replicable_coin_classifier(&s, 0.5, &trial.child("ext"), &trial.child("int")).unwrap();
        let b =
            replicable_coin_classifier(&s, 0.5, &trial.child("ext"), &trial.child("int")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn acceptance_curve_endpoints_and_monotonicity() {
        let threshold = 0.8;
        let classify = move |flips: &[u8]| {
            let mean = flips.iter().map(|&f| f as f64).sum::<f64>() / flips.len() as f64;
            mean > threshold
        };
        let grid: Vec<f64> = vec![0.0, 0.2, 0.4, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 1.0];
        let curve = acceptance_curve(
            classify,
            &grid,
            100,
            1500,
            &SeedStream::from_root(136).child("curve"),
        )
        .unwrap();
        assert_eq!(curve.points[0].acc, 0.0);
        assert_eq!(curve.points.last().unwrap().acc, 1.0);
        // Monotone within CI noise.
        for w in curve.points.windows(2) {
            let slack = (w[0].ci_high - w[0].ci_low) + (w[1].ci_high - w[1].ci_low);
            assert!(
                w[1].acc >= w[0].acc - slack,
                "dip at p = {}: {} -> {}",
                w[1].p,
                w[0].acc,
                w[1].acc
            );
        }
    }

    #[test]
    fn acceptance_slope_respects_derivative_bound() {
        // The curve's steepest secant over [0.7, 0.9] must stay under
        // the derivative bound sqrt(m/(p(1-p))) at the segment's worst
        // p, with MC slack.
        let threshold = 0.8;
        let classify = move |flips: &[u8]| {
            let mean = flips.iter().map(|&f| f as f64).sum::<f64>() / flips.len() as f64;
            mean > threshold
        };
        let m = 100;
        let grid: Vec<f64> = (0..=10).map(|i| 0.7 + 0.02 * i as f64).collect();
        let curve = acceptance_curve(
            classify,
            &grid,
            m,
            4000,
            &SeedStream::from_root(137).child("curve"),
        )
        .unwrap();
        // p(1-p) is smallest at p = 0.9 on this grid.
        let bound = (m as f64 / (0.9 * 0.1)).sqrt();
        assert!(
            curve.max_slope <= bound * 1.2,
            "max slope {} vs bound {bound}",
            curve.max_slope
        );
    }

    #[test]
    fn replicable_budget_grows_superlinearly_in_n() {
        // Per-coin parameters (eps/2, rho/N, delta/N) make the total
        // budget grow like N^3 for large N; at fixed rho the measured
        // exponent over N = 2 -> 8 already exceeds 1.5.
        let rho = 0.3;
        let total = |n: usize| {
            let biases = vec![0.8; n];
            let s = CoinProblemSpec::new(n, 0.9, 0.2, 0.05, 1, biases).unwrap();
            n as f64 * replicable_coin_budget(&s, rho).unwrap() as f64
        };
        let exponent = (total(8) / total(2)).ln() / 4.0f64.ln();
        assert!(exponent > 1.5, "measured budget exponent {exponent}");
        assert!(exponent < 3.5, "measured budget exponent {exponent}");
    }

    #[test]
    fn naive_inconsistency_decays_like_inverse_sqrt_m() {
        // The paired inconsistency at uniform bias decays like
        // m^(-1/2); the log-log slope over two decades of m must sit
        // near -0.5.
        let root = SeedStream::from_root(138);
        let ms = [100usize, 1000, 10_000];
        let rates: Vec<f64> = ms
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                naive_paired_inconsistency(0.9, 0.2, m, 4000, &root.child_idx("m", i as u64))
            })
            .collect();
        let slope = (rates[2].ln() - rates[0].ln()) / ((ms[2] as f64).ln() - (ms[0] as f64).ln());
        assert!(
            (slope - (-0.5)).abs() <= 0.15,
            "slope {slope}, rates {rates:?}"
        );
    }
}
