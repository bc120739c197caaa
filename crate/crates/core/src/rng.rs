//! Seeded random streams and counter-based seed derivation.
//!
//! Every replication owns a [`Stream`] whose seed is a pure function of the
//! master seed and the replication's coordinates, so results never depend on
//! how work is scheduled across threads.
//!
//! Seed derivation uses the SplitMix64 finalizer
//!
//! ```text
//! mix64(z):  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//!            z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//!            z ^ (z >> 31)
//! derive_seed(m, a, b) = mix64(mix64(m + G·(a+1)) + G·(b+1))     (wrapping, G = 0x9e3779b97f4a7c15)
//! ```
//!
//! Streams are ChaCha8 keyed by `seed_from_u64(seed)`. Uniforms take the top
//! 53 bits of a 64-bit word; normals use the Marsaglia polar method.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for coordinate `(a, b)` under `master`.
#[inline]
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    let inner = mix64(master.wrapping_add(GOLDEN.wrapping_mul(a.wrapping_add(1))));
    mix64(inner.wrapping_add(GOLDEN.wrapping_mul(b.wrapping_add(1))))
}

#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (rejection of the biased tail).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Standard normal variate.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let v1 = 2.0 * self.uniform() - 1.0;
            let v2 = 2.0 * self.uniform() - 1.0;
            let s = v1 * v1 + v2 * v2;
            if s >= 1.0 || s == 0.0 {
                continue;
            }
            let f = (-2.0 * s.ln() / s).sqrt();
            self.spare = Some(v2 * f);
            return v1 * f;
        }
    }

    /// Uniform direction on the unit sphere `S^{d-1}`.
    pub fn unit_vector(&mut self, d: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| self.gaussian()).collect();
            let n = crate::geometry::norm(&v);
            if n > 1e-150 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }
}
