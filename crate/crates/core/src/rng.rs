//! Seeded random number generation.
//!
//! A thin wrapper over ChaCha12 with hand-rolled uniform and Box-Muller
//! normal transforms. Keeping the transforms in-crate pins the exact draw
//! sequence, so simulations are bit-for-bit reproducible for a given seed
//! regardless of upstream distribution-crate changes.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

#[cfg(not(feature = "std"))]
use num_traits::Float;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

pub struct SeedRng {
    inner: ChaCha12Rng,
    /// Box-Muller produces normals in pairs; the second is held here.
    spare_normal: Option<f64>,
}

impl SeedRng {
    pub fn new(seed: u64) -> Self {
        SeedRng { inner: ChaCha12Rng::seed_from_u64(seed), spare_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw via Box-Muller.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - U maps [0,1) to (0,1], keeping the log argument positive.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = TWO_PI * u2;
        self.spare_normal = Some(radius * theta.sin());
        radius * theta.cos()
    }
}
