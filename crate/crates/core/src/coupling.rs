//! Shared-randomness coupling of Gaussian outputs via a Poisson point
//! process, upgrading TV-indistinguishable mechanisms to exact
//! replicability.
//!
//! Both executions enumerate the identical sequence of atoms
//! `(x_i, y_i, t_i)` from the shared internal stream: `x` uniform in a
//! truncation box, `y` uniform under the box height, `t` the running sum
//! of exponential arrivals. Each execution accepts the earliest atom
//! lying under its own density curve. Two executions whose densities
//! are at TV distance `tv` pick different atoms with probability at
//! most `2 tv / (1 + tv)` (plus truncation slack), and identical
//! densities always pick the same atom.
//!
//! The box must be execution-independent. Deriving it from a run's own
//! realized mean would give the two executions different atom
//! sequences and destroy the coupling, so boxes are built from the a
//! priori range of the means (e.g. `[0, 1]` for bounded queries)
//! padded by `8 sigma`, keeping the truncated mass far below the
//! `1e-6` enclosure requirement.
//!
//! The acceptance rate of an atom is `~1/(volume * height)`, so the
//! atom budget grows exponentially with the dimension; dimensions
//! above [`MAX_COUPLING_DIM`] are rejected.

use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::divergence::{standard_normal_cdf, tv_gaussian_isotropic, GaussianVector};
use crate::error::{Error, Result};
use crate::gaussian::GaussianMechanismParams;
use crate::seed::{SeedStream, StreamRng};
use crate::sq::EstimateVector;

/// Largest output dimension the coupling supports.
pub const MAX_COUPLING_DIM: usize = 8;

/// Density mass allowed outside the truncation box.
pub const TRUNCATION_TAIL_BOUND: f64 = 1e-6;

/// Probability that no atom in the recommended budget is accepted.
pub const ACCEPT_FAILURE_BOUND: f64 = 1e-6;

/// Default box padding around the mean range, in units of sigma.
pub const DEFAULT_BOX_SIGMAS: f64 = 8.0;

/// One atom of the point process.
#[derive(Debug, Clone, PartialEq)]
pub struct PppAtom {
    pub x: Vec<f64>,
    pub y: f64,
    pub t: f64,
}

/// Axis-aligned truncation region with a height cap for the density
/// axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub height: f64,
}

impl TruncationBox {
    /// Box for a family of isotropic Gaussians with shared variance
    /// whose coordinate means lie in `[mean_lo[i], mean_hi[i]]`: the
    /// range padded by `n_sigmas * sigma`, with height 1% above the
    /// family's common density maximum.
    pub fn for_gaussian_family(
        mean_lo: &[f64],
        mean_hi: &[f64],
        sigma_sq: f64,
        n_sigmas: f64,
    ) -> Result<Self> {
        if mean_lo.len() != mean_hi.len() || mean_lo.is_empty() {
            return Err(Error::ShapeMismatch(
                "mean range bounds must be non-empty and of equal length".to_string(),
            ));
        }
        if !(sigma_sq > 0.0) || !(n_sigmas > 0.0) {
            return Err(Error::InvalidParameter(
                "sigma_sq and n_sigmas must be positive".to_string(),
            ));
        }
        let d = mean_lo.len();
        let sigma = sigma_sq.sqrt();
        let lo: Vec<f64> = mean_lo.iter().map(|&m| m - n_sigmas * sigma).collect();
        let hi: Vec<f64> = mean_hi.iter().map(|&m| m + n_sigmas * sigma).collect();
        for i in 0..d {
            if !(hi[i] > lo[i]) || mean_hi[i] < mean_lo[i] {
                return Err(Error::InvalidParameter(format!(
                    "degenerate mean range at coordinate {i}"
                )));
            }
        }
        let height = gaussian_density_max(d, sigma_sq) * 1.01;
        Ok(TruncationBox { lo, hi, height })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    /// PPP rate per unit time: box volume times height.
    pub fn rate(&self) -> f64 {
        self.volume() * self.height
    }

    /// Atom count making the no-acceptance probability at most
    /// [`ACCEPT_FAILURE_BOUND`]: an atom is accepted with probability
    /// at least `(1 - tail)/(volume*height)`, so
    /// `n >= ln(1/bound) * volume * height / (1 - tail)` suffices.
    pub fn recommended_atom_budget(&self) -> usize {
        let p_accept = (1.0 - TRUNCATION_TAIL_BOUND) / self.rate();
        ((1.0 / ACCEPT_FAILURE_BOUND).ln() / p_accept).ceil() as usize
    }

    /// Union-bound estimate of `density`'s mass outside the box.
    pub fn tail_mass(&self, density: &GaussianVector) -> f64 {
        let sigma = density.sigma();
        density
            .mean
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&m, (&l, &h))| {
                standard_normal_cdf((l - m) / sigma) + (1.0 - standard_normal_cdf((h - m) / sigma))
            })
            .sum()
    }

    fn check_encloses(&self, density: &GaussianVector) -> Result<()> {
        if density.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "density dimension {} vs box dimension {}",
                density.dim(),
                self.dim()
            )));
        }
        let tail = self.tail_mass(density);
        if tail > TRUNCATION_TAIL_BOUND {
            return Err(Error::DensityNotEnclosed {
                estimated: tail,
                allowed: TRUNCATION_TAIL_BOUND,
            });
        }
        if gaussian_density_max(density.dim(), density.variance) > self.height {
            return Err(Error::DensityNotEnclosed {
                estimated: f64::INFINITY,
                allowed: TRUNCATION_TAIL_BOUND,
            });
        }
        Ok(())
    }
}

fn gaussian_density_max(d: usize, sigma_sq: f64) -> f64 {
    (std::f64::consts::TAU * sigma_sq).powf(-(d as f64) / 2.0)
}

/// Isotropic Gaussian density at `x`.
pub fn gaussian_density_at(x: &[f64], density: &GaussianVector) -> f64 {
    let sq: f64 = x
        .iter()
        .zip(&density.mean)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    gaussian_density_max(density.dim(), density.variance) * (-sq / (2.0 * density.variance)).exp()
}

fn next_atom(rng: &mut StreamRng, boxx: &TruncationBox, t: &mut f64) -> PppAtom {
    *t += rng.exponential(boxx.rate());
    let x: Vec<f64> = boxx
        .lo
        .iter()
        .zip(&boxx.hi)
        .map(|(&l, &h)| rng.uniform_range(l, h))
        .collect();
    let y = rng.uniform_f64() * boxx.height;
    PppAtom { x, y, t: *t }
}

/// Materialize the first `n` atoms of the process over `boxx` driven by
/// `internal`. Depends on the stream and the box only, never on any
/// density, which is what makes the atom sequence shareable.
pub fn ppp_atoms(boxx: &TruncationBox, n: usize, internal: &SeedStream) -> Vec<PppAtom> {
    let mut rng = internal.rng();
    let mut t = 0.0;
    (0..n).map(|_| next_atom(&mut rng, boxx, &mut t)).collect()
}

/// Draw one sample of the (truncated) `density` from the shared atom
/// sequence: the earliest atom under the density curve.
///
/// Fails with [`Error::NoAtomAccepted`] if no atom within `atom_budget`
/// is accepted; with the recommended budget this has probability at
/// most [`ACCEPT_FAILURE_BOUND`].
pub fn ppp_coupled_sample(
    density: &GaussianVector,
    boxx: &TruncationBox,
    atom_budget: usize,
    internal: &SeedStream,
) -> Result<Vec<f64>> {
    if density.dim() > MAX_COUPLING_DIM {
        return Err(Error::UnsupportedDimension {
            dim: density.dim(),
            max: MAX_COUPLING_DIM,
        });
    }
    boxx.check_encloses(density)?;
    if atom_budget == 0 {
        return Err(Error::InvalidParameter(
            "atom budget must be positive".to_string(),
        ));
    }
    // Atoms arrive in increasing t, so the first acceptance is the
    // argmin over accepted arrival times. Lazy generation: a run that
    // accepts early simply never materializes the later atoms, which
    // the paired run would enumerate identically.
    let mut rng = internal.rng();
    let mut t = 0.0;
    for _ in 0..atom_budget {
        let atom = next_atom(&mut rng, boxx, &mut t);
        if gaussian_density_at(&atom.x, density) > atom.y {
            return Ok(atom.x);
        }
    }
    Err(Error::NoAtomAccepted(atom_budget))
}

/// Worst-case disagreement probability of the coupling at a given TV
/// distance: `2 tv / (1 + tv)`.
pub fn joint_disagreement_bound(tv: f64) -> f64 {
    assert!((0.0..=1.0).contains(&tv));
    2.0 * tv / (1.0 + tv)
}

/// Mean gap producing an exact TV of `tv` between two equal-variance
/// 1-d Gaussians: `2 sigma Phi^{-1}((1+tv)/2)`.
pub fn gap_for_target_tv(tv: f64, sigma: f64) -> f64 {
    assert!((0.0..1.0).contains(&tv) && sigma > 0.0);
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
    2.0 * sigma * normal.inverse_cdf((1.0 + tv) / 2.0)
}

/// Replicable estimation of `d` bounded mean queries (the coupled
/// upgrade of the Gaussian mechanism).
///
/// `sample_mean(i, n)` must return an estimate of query `i`'s true
/// value from `n` fresh samples. The mechanism runs at TV parameter
/// `rho/2` with the tighter coupled accuracy target, and the output is
/// drawn through the shared coupling, so two executions on independent
/// data sharing `internal` return the bit-identical vector with
/// probability at least `1 - rho`.
pub fn replicable_multi_query(
    mut sample_mean: impl FnMut(usize, u64) -> f64,
    params: &GaussianMechanismParams,
    internal: &SeedStream,
) -> Result<EstimateVector> {
    let d = params.d();
    if d > MAX_COUPLING_DIM {
        return Err(Error::UnsupportedDimension {
            dim: d,
            max: MAX_COUPLING_DIM,
        });
    }
    let target = params.coupled_mean_accuracy_target();
    let n = params.per_query_budget(target);
    let means: Vec<f64> = (0..d).map(|i| sample_mean(i, n).clamp(0.0, 1.0)).collect();
    let sigma_sq = params.sigma_sq();
    let boxx = TruncationBox::for_gaussian_family(
        &vec![0.0; d],
        &vec![1.0; d],
        sigma_sq,
        DEFAULT_BOX_SIGMAS,
    )?;
    let density = GaussianVector::new(means, sigma_sq)?;
    let values = ppp_coupled_sample(
        &density,
        &boxx,
        boxx.recommended_atom_budget(),
        &internal.child("coupling"),
    )?;
    EstimateVector::new(values, params.epsilon(), params.rho(), params.delta())
}

/// Per-query sample budget used by [`replicable_multi_query`].
pub fn multi_query_budget(params: &GaussianMechanismParams) -> u64 {
    params.d() as u64 * params.per_query_budget(params.coupled_mean_accuracy_target())
}

/// Outcome of the coordinate-wise versus joint coupling diagnostic at
/// one dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingDiagnostic {
    pub dim: usize,
    pub trials: u32,
    /// Empirical disagreement when every coordinate is coupled
    /// independently.
    pub coordinatewise_disagreement: f64,
    /// Empirical disagreement of the joint coupling, when the dimension
    /// is small enough to simulate.
    pub joint_disagreement: Option<f64>,
    /// Closed-form worst-case bound `2 tv_d/(1+tv_d)` for the joint
    /// coupling.
    pub joint_bound: f64,
}

/// Compare coordinate-wise coupling against the joint coupling for two
/// mean vectors separated by `per_coord_gap` in every coordinate.
///
/// Coordinate-wise disagreement accumulates roughly linearly in the
/// dimension while the joint coupling's TV grows only with
/// `sqrt(dim)`; the joint coupling is simulated when feasible
/// (`dim <= 4`) and bounded in closed form otherwise.
pub fn coordinatewise_vs_joint(
    dim: usize,
    per_coord_gap: f64,
    sigma_sq: f64,
    trials: u32,
    root: &SeedStream,
) -> Result<CouplingDiagnostic> {
    let mean_a = vec![0.5 - per_coord_gap / 2.0; dim];
    let mean_b = vec![0.5 + per_coord_gap / 2.0; dim];
    let range_lo = vec![mean_a[0]; 1];
    let range_hi = vec![mean_b[0]; 1];
    let box_1d =
        TruncationBox::for_gaussian_family(&range_lo, &range_hi, sigma_sq, DEFAULT_BOX_SIGMAS)?;
    let budget_1d = box_1d.recommended_atom_budget();
    let da = GaussianVector::new(vec![mean_a[0]], sigma_sq)?;
    let db = GaussianVector::new(vec![mean_b[0]], sigma_sq)?;

    let mut cw_disagree = 0u32;
    for t in 0..trials {
        let trial = root.child_idx("cw", u64::from(t));
        let mut any = false;
        for j in 0..dim {
            let stream = trial.child_idx("coord", j as u64);
            let xa = ppp_coupled_sample(&da, &box_1d, budget_1d, &stream)?;
            let xb = ppp_coupled_sample(&db, &box_1d, budget_1d, &stream)?;
            if xa[0].to_bits() != xb[0].to_bits() {
                any = true;
                break;
            }
        }
        if any {
            cw_disagree += 1;
        }
    }

    let joint_disagreement = if dim <= 4 {
        let box_d = TruncationBox::for_gaussian_family(
            &vec![mean_a[0]; dim],
            &vec![mean_b[0]; dim],
            sigma_sq,
            DEFAULT_BOX_SIGMAS,
        )?;
        let budget_d = box_d.recommended_atom_budget();
        let full_a = GaussianVector::new(mean_a.clone(), sigma_sq)?;
        let full_b = GaussianVector::new(mean_b.clone(), sigma_sq)?;
        let mut disagree = 0u32;
        for t in 0..trials {
            let stream = root.child_idx("joint", u64::from(t));
            let xa = ppp_coupled_sample(&full_a, &box_d, budget_d, &stream)?;
            let xb = ppp_coupled_sample(&full_b, &box_d, budget_d, &stream)?;
            if xa.iter().zip(&xb).any(|(a, b)| a.to_bits() != b.to_bits()) {
                disagree += 1;
            }
        }
        Some(f64::from(disagree) / f64::from(trials))
    } else {
        None
    };

    let full_a = GaussianVector::new(mean_a, sigma_sq)?;
    let full_b = GaussianVector::new(mean_b, sigma_sq)?;
    let tv_d = tv_gaussian_isotropic(&full_a, &full_b)?;
    Ok(CouplingDiagnostic {
        dim,
        trials,
        coordinatewise_disagreement: f64::from(cw_disagree) / f64::from(trials),
        joint_disagreement,
        joint_bound: joint_disagreement_bound(tv_d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::tv_gaussian_1d;

    fn unit_box() -> TruncationBox {
        TruncationBox::for_gaussian_family(&[0.0], &[1.0], 0.01, 8.0).unwrap()
    }

    #[test]
    fn box_geometry() {
        let b = unit_box();
        assert_eq!(b.dim(), 1);
        // [0 - 0.8, 1 + 0.8] at sigma = 0.1.
        assert!((b.volume() - 2.6).abs() < 1e-12);
        let peak = (std::f64::consts::TAU * 0.01).powf(-0.5);
        assert!((b.height - 1.01 * peak).abs() < 1e-12);
        assert!(b.recommended_atom_budget() > 0);
    }

    #[test]
    fn identical_densities_always_agree() {
        let b = unit_box();
        let d = GaussianVector::new(vec![0.5], 0.01).unwrap();
        let budget = b.recommended_atom_budget();
        for t in 0..500 {
            let stream = SeedStream::from_root(60).child_idx("trial", t);
            let a = ppp_coupled_sample(&d, &b, budget, &stream).unwrap();
            let bb = ppp_coupled_sample(&d, &b, budget, &stream).unwrap();
            assert_eq!(a[0].to_bits(), bb[0].to_bits());
        }
    }

    #[test]
    fn atoms_independent_of_density() {
        let b = unit_box();
        let stream = SeedStream::from_root(61).child("atoms");
        let a1 = ppp_atoms(&b, 100, &stream);
        let a2 = ppp_atoms(&b, 100, &stream);
        assert_eq!(a1, a2);
        // Arrival times are sorted.
        assert!(a1.windows(2).all(|w| w[0].t < w[1].t));
        // The coupled sample picks the earliest accepted atom of the
        // same sequence.
        let d = GaussianVector::new(vec![0.5], 0.01).unwrap();
        let picked = ppp_coupled_sample(&d, &b, 100, &stream).unwrap();
        let by_scan = a1
            .iter()
            .find(|atom| gaussian_density_at(&atom.x, &d) > atom.y)
            .unwrap();
        assert_eq!(picked, by_scan.x);
    }

    #[test]
    fn disagreement_bounded_by_coupling_theorem() {
        // Two 1-d Gaussians at exact TV 0.2: paired disagreement over
        // 3000 trials stays below 2*0.2/1.2 plus 3-sigma slack.
        let sigma: f64 = 0.1;
        let gap = gap_for_target_tv(0.2, sigma);
        let da = GaussianVector::new(vec![0.5 - gap / 2.0], sigma * sigma).unwrap();
        let db = GaussianVector::new(vec![0.5 + gap / 2.0], sigma * sigma).unwrap();
        let tv = tv_gaussian_1d(&da, &db).unwrap();
        assert!((tv - 0.2).abs() < 1e-10);

        let b = TruncationBox::for_gaussian_family(
            &[0.5 - gap / 2.0],
            &[0.5 + gap / 2.0],
            sigma * sigma,
            8.0,
        )
        .unwrap();
        let budget = b.recommended_atom_budget();
        let trials = 3000u32;
        let mut disagree = 0u32;
        for t in 0..trials {
            let stream = SeedStream::from_root(62).child_idx("trial", u64::from(t));
            let xa = ppp_coupled_sample(&da, &b, budget, &stream).unwrap();
            let xb = ppp_coupled_sample(&db, &b, budget, &stream).unwrap();
            if xa[0].to_bits() != xb[0].to_bits() {
                disagree += 1;
            }
        }
        let rate = f64::from(disagree) / f64::from(trials);
        let bound = joint_disagreement_bound(0.2);
        let slack = 3.0 * (bound * (1.0 - bound) / f64::from(trials)).sqrt();
        assert!(rate <= bound + slack, "rate {rate} vs bound {bound}");
    }

    #[test]
    fn marginal_matches_truncated_gaussian() {
        // KS statistic of 1e5 coupled samples against the Gaussian CDF
        // (truncation mass < 1e-12 here, so the full CDF is fine).
        let sigma_sq = 0.04;
        let d = GaussianVector::new(vec![0.3], sigma_sq).unwrap();
        let b = TruncationBox::for_gaussian_family(&[0.3], &[0.3], sigma_sq, 8.0).unwrap();
        let budget = b.recommended_atom_budget();
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|i| {
                ppp_coupled_sample(&d, &b, budget, &SeedStream::from_root(63).child_idx("s", i))
                    .unwrap()[0]
            })
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sigma = sigma_sq.sqrt();
        let mut ks = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let cdf = standard_normal_cdf((x - 0.3) / sigma);
            let emp_hi = (i + 1) as f64 / n as f64;
            let emp_lo = i as f64 / n as f64;
            ks = ks.max((cdf - emp_lo).abs()).max((cdf - emp_hi).abs());
        }
        assert!(ks <= 0.01, "KS statistic {ks}");
    }

    #[test]
    fn enclosure_and_dimension_errors() {
        let b = unit_box();
        // Mean far outside the box: tail mass near 1.
        let stray = GaussianVector::new(vec![25.0], 0.01).unwrap();
        let stream = SeedStream::from_root(64).child("x");
        assert!(matches!(
            ppp_coupled_sample(&stray, &b, 100, &stream),
            Err(Error::DensityNotEnclosed { .. })
        ));

        let wide = GaussianVector::new(vec![0.5], 10.0).unwrap();
        assert!(ppp_coupled_sample(&wide, &b, 100, &stream).is_err());

        let big = GaussianVector::new(vec![0.0; MAX_COUPLING_DIM + 1], 0.01).unwrap();
        assert!(matches!(
            ppp_coupled_sample(&big, &b, 100, &stream),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn no_acceptance_is_explicit() {
        let b = unit_box();
        let d = GaussianVector::new(vec![0.5], 0.01).unwrap();
        // A budget of 1 atom nearly always misses.
        let mut failures = 0;
        for t in 0..50 {
            let stream = SeedStream::from_root(65).child_idx("trial", t);
            if matches!(
                ppp_coupled_sample(&d, &b, 1, &stream),
                Err(Error::NoAtomAccepted(1))
            ) {
                failures += 1;
            }
        }
        assert!(failures > 30, "only {failures} failures");
    }

    #[test]
    fn multi_query_identical_streams_identical_outputs() {
        let params = GaussianMechanismParams::new(0.3, 0.4, 0.05, 2).unwrap();
        let internal = SeedStream::from_root(66).child("internal");
        let data = [0.3, 0.7];
        let sampler = |i: usize, _n: u64| data[i];
        let a = replicable_multi_query(sampler, &params, &internal).unwrap();
        let b = replicable_multi_query(sampler, &params, &internal).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_query_paired_agreement_on_bernoulli() {
        // d = 1 Bernoulli(0.5) stream at eps = 0.2, rho = 0.3,
        // delta = 0.05: exact agreement over 300 paired runs clears
        // 1 - rho.
        let params = GaussianMechanismParams::new(0.2, 0.3, 0.05, 1).unwrap();
        let root = SeedStream::from_root(68);
        let trials = 300u32;
        let mut agree = 0u32;
        for t in 0..trials {
            let trial = root.child_idx("trial", u64::from(t));
            let internal = trial.child("internal");
            let run = |label: &str| {
                let mut rng = trial.child(label).rng();
                let sampler = |_i: usize, n: u64| {
                    let mut sum = 0u64;
                    for _ in 0..n {
                        sum += u64::from(rng.bernoulli(0.5));
                    }
                    sum as f64 / n as f64
                };
                replicable_multi_query(sampler, &params, &internal).unwrap()
            };
            if run("external-a") == run("external-b") {
                agree += 1;
            }
        }
        let rate = f64::from(agree) / f64::from(trials);
        assert!(rate >= 0.7, "agreement rate {rate}");
    }

    #[test]
    fn multi_query_accuracy_coverage() {
        // d = 2, truth (0.3, 0.7): both coordinates land within eps
        // with probability at least 1 - delta (500 runs).
        let (eps, delta) = (0.2, 0.05);
        let params = GaussianMechanismParams::new(eps, 0.3, delta, 2).unwrap();
        let truth = [0.3, 0.7];
        let root = SeedStream::from_root(69);
        let runs = 500u32;
        let mut ok = 0u32;
        for t in 0..runs {
            let trial = root.child_idx("run", u64::from(t));
            let mut rng = trial.child("external").rng();
            let sampler = |i: usize, n: u64| {
                let mut sum = 0u64;
                for _ in 0..n {
                    sum += u64::from(rng.bernoulli(truth[i]));
                }
                sum as f64 / n as f64
            };
            let out = replicable_multi_query(sampler, &params, &trial.child("internal")).unwrap();
            let worst = out
                .values
                .iter()
                .zip(&truth)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ok += u32::from(worst <= eps);
        }
        let rate = f64::from(ok) / f64::from(runs);
        assert!(rate >= 1.0 - delta - 0.03, "coverage {rate}");
    }

    #[test]
    fn coordinatewise_loses_to_joint_in_high_dimension() {
        let sigma_sq = 0.01;
        let gap = 0.02;
        let root = SeedStream::from_root(67);
        let d16 = coordinatewise_vs_joint(16, gap, sigma_sq, 400, &root).unwrap();
        assert!(
            d16.joint_bound < d16.coordinatewise_disagreement,
            "joint bound {} vs coordinate-wise {}",
            d16.joint_bound,
            d16.coordinatewise_disagreement
        );
        // At d = 4 the joint coupling is simulated directly and should
        // also beat independent per-coordinate coupling.
        let d4 = coordinatewise_vs_joint(4, gap, sigma_sq, 400, &root.child("d4")).unwrap();
        let joint = d4.joint_disagreement.unwrap();
        assert!(
            joint < d4.coordinatewise_disagreement + 0.05,
            "joint {} vs coordinate-wise {}",
            joint,
            d4.coordinatewise_disagreement
        );
        // Disagreement grows with dimension for the naive strategy.
        let d1 = coordinatewise_vs_joint(1, gap, sigma_sq, 400, &root.child("d1")).unwrap();
        assert!(d1.coordinatewise_disagreement < d16.coordinatewise_disagreement);
    }
}
