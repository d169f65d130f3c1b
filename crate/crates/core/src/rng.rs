//! Seeded random source shared by every stochastic step of a solver run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic generator: the same seed always yields the same draws.
///
/// One instance belongs to one solver run; it is deliberately not `Clone`
/// so that two runs cannot silently share a stream.
#[derive(Debug)]
pub struct SolverRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SolverRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform integer in the closed range `[lo, hi]`.
    pub fn int_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.gen_range(lo..=hi)
    }

    /// Uniform angle in `[0, 2π)`.
    pub fn angle(&mut self) -> f64 {
        self.unit() * std::f64::consts::TAU
    }

    /// Uniform point in the disk of the given radius (area-correct polar sampling).
    pub fn point_in_disk(&mut self, radius: f64) -> [f64; 2] {
        let r = radius * self.unit().sqrt();
        let theta = self.angle();
        [r * theta.cos(), r * theta.sin()]
    }
}

/// Mixes a base seed with per-cell coordinates (instance size, repetition).
///
/// SplitMix64 finalizer over the pair, xor'ed into the base seed.
pub fn derive_seed(base: u64, n: usize, repetition: usize) -> u64 {
    let mut z = (n as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((repetition as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    base ^ z
}
