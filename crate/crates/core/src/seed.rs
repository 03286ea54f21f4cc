//! Named, splittable, platform-stable random streams.
//!
//! Every random decision in this crate draws from a [`SeedStream`]: a
//! `(root_seed, path)` pair where the path is a list of string labels.
//! Deriving the same `(root_seed, path)` always yields the bit-identical
//! byte stream, on every platform and in every run, which is the property
//! paired-execution experiments are built on. Distinct paths give
//! independent streams, so sub-computations can be re-run in isolation
//! and parallel workers can pre-split their randomness up front.
//!
//! The generator behind a stream is ChaCha with 8 rounds, keyed by
//! SHA-256 of the root seed and the path labels. ChaCha is a pure
//! integer counter-based stream cipher, so the byte stream is exact on
//! every platform; the golden test below pins the derivation so that a
//! dependency or encoding change cannot silently alter it. Floating
//! point transformations (`ln`, `cos`) follow IEEE semantics and the
//! system libm, which in practice agree to the last bit on supported
//! targets but are not pinned by the golden vectors.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

/// Domain separator for seed derivation; bump when the encoding changes.
const DERIVE_DOMAIN: &[u8] = b"repliq/seed/v1";

/// A named handle on an infinite random byte stream.
///
/// The handle itself is immutable; call [`SeedStream::rng`] to
/// materialize a stateful generator positioned at the start of the
/// stream. A stream is meant to have a single consumer — parallel code
/// must derive disjoint children before fanning out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedStream {
    root_seed: u64,
    path: Vec<String>,
}

impl SeedStream {
    /// Stream at the root of the derivation tree.
    pub fn from_root(root_seed: u64) -> Self {
        SeedStream {
            root_seed,
            path: Vec::new(),
        }
    }

    /// Derive the child stream named by `label`.
    ///
    /// The same `(root, path, label)` always produces the same child;
    /// different labels produce independent streams.
    pub fn child(&self, label: &str) -> Self {
        assert!(!label.is_empty(), "stream label must be non-empty");
        let mut path = self.path.clone();
        path.push(label.to_string());
        SeedStream {
            root_seed: self.root_seed,
            path,
        }
    }

    /// Derive an indexed child, e.g. one stream per trial or coordinate.
    pub fn child_idx(&self, label: &str, idx: u64) -> Self {
        self.child(&format!("{label}.{idx}"))
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// Dotted path string, for run records.
    pub fn path_string(&self) -> String {
        self.path.join("/")
    }

    fn seed_bytes(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(DERIVE_DOMAIN);
        hasher.update(self.root_seed.to_le_bytes());
        for label in &self.path {
            hasher.update((label.len() as u64).to_le_bytes());
            hasher.update(label.as_bytes());
        }
        hasher.finalize().into()
    }

    /// Materialize the generator for this stream.
    pub fn rng(&self) -> StreamRng {
        StreamRng {
            inner: ChaCha8Rng::from_seed(self.seed_bytes()),
        }
    }
}

/// Stateful generator over one stream, with the fixed set of sampling
/// transformations used everywhere in the crate.
///
/// All samplers are written against `next_u64` with explicit arithmetic
/// so a call sequence consumes a deterministic amount of the stream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest);
    }

    /// Uniform draw from `[0, 1)` with 53 bits of precision.
    pub fn uniform_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform_f64()
    }

    /// Bernoulli draw; `p` must lie in `[0, 1]`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        debug_assert!((0.0..=1.0).contains(&p));
        self.uniform_f64() < p
    }

    /// Standard normal via Box-Muller (cosine branch; one draw per two
    /// uniforms, no cached state).
    pub fn standard_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform_f64(); // (0, 1], keeps ln finite
        let u2 = self.uniform_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn gaussian(&mut self, mean: f64, sigma: f64) -> f64 {
        mean + sigma * self.standard_gaussian()
    }

    /// Exponential with the given rate (mean `1/rate`).
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        let u = 1.0 - self.uniform_f64();
        -u.ln() / rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_path_same_bytes() {
        let a = SeedStream::from_root(7).child("q").child("round");
        let b = SeedStream::from_root(7).child("q").child("round");
        let mut ba = [0u8; 64];
        let mut bb = [0u8; 64];
        a.rng().fill_bytes(&mut ba);
        b.rng().fill_bytes(&mut bb);
        assert_eq!(ba, bb);
    }

    #[test]
    fn distinct_labels_distinct_bytes() {
        let root = SeedStream::from_root(7);
        let mut ba = [0u8; 64];
        let mut bb = [0u8; 64];
        root.child("a").rng().fill_bytes(&mut ba);
        root.child("b").rng().fill_bytes(&mut bb);
        assert_ne!(ba, bb);
    }

    #[test]
    fn rebuilt_child_path_matches() {
        let derived = SeedStream::from_root(99).child("q").child("round");
        let rebuilt = SeedStream {
            root_seed: 99,
            path: vec!["q".to_string(), "round".to_string()],
        };
        assert_eq!(derived, rebuilt);
        assert_eq!(derived.rng().next_u64(), rebuilt.rng().next_u64());
    }

    /// Golden vectors: pin the derivation chain end-to-end. If this test
    /// fails the stream encoding changed and every recorded experiment
    /// seed is invalidated.
    #[test]
    fn golden_vectors() {
        let mut rng = SeedStream::from_root(42).child("golden").rng();
        let got: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(got, GOLDEN_ROOT42_GOLDEN);

        let mut rng = SeedStream::from_root(0).rng();
        let got: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(got, GOLDEN_ROOT0_EMPTY);
    }

    // Frozen outputs of the v1 derivation (SHA-256 keying + ChaCha8).
    const GOLDEN_ROOT42_GOLDEN: [u64; 4] = [GOLDEN_A0, GOLDEN_A1, GOLDEN_A2, GOLDEN_A3];
    const GOLDEN_ROOT0_EMPTY: [u64; 4] = [GOLDEN_B0, GOLDEN_B1, GOLDEN_B2, GOLDEN_B3];

    include!("seed_golden.rs");

    #[test]
    fn uniform_in_range() {
        let mut rng = SeedStream::from_root(1).rng();
        for _ in 0..1000 {
            let u = rng.uniform_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn bernoulli_endpoints() {
        let mut rng = SeedStream::from_root(2).rng();
        for _ in 0..100 {
            assert!(!rng.bernoulli(0.0));
            assert!(rng.bernoulli(1.0));
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = SeedStream::from_root(3).rng();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.standard_gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
