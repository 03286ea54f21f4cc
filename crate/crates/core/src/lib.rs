//! Replicable estimation of optimal Q-functions and policies for
//! discounted tabular MDPs with generative-model access.
//!
//! The crate provides, in rough dependency order:
//!
//! * [`seed`] — named, splittable, platform-stable random streams (the
//!   shared internal randomness of paired executions);
//! * [`mdp`] — tabular MDPs, exact solvers, policies;
//! * [`family`] — the hard-instance MDP family with closed-form optima;
//! * [`sampling`] — generative-model access with exact sample ledgers;
//! * [`divergence`] — TV / Renyi / KL measures and Gaussian TV oracles;
//! * [`sq`] — replicable statistical-query estimation by offset-grid
//!   rounding;
//! * [`gaussian`] — the TV-indistinguishable multi-query Gaussian
//!   mechanism;
//! * [`coupling`] — shared-randomness Poisson-process coupling that
//!   upgrades the mechanism to exact replicability;
//! * [`estimators`] — end-to-end Q-function / policy estimators under
//!   each replicability notion;
//! * [`coins`] — the multiple-coin identification harness;
//! * [`harness`] — paired-run replicability measurement;
//! * [`suite`] — experiment suites, run records, and CSV emission.

pub mod coins;
pub mod coupling;
pub mod divergence;
pub mod error;
pub mod estimators;
pub mod family;
pub mod gaussian;
pub mod harness;
pub mod mdp;
pub mod sampling;
pub mod seed;
pub mod sq;
pub mod suite;

pub use error::{Error, Result};
