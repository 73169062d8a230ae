//! Seedable, platform-independent random streams.
//!
//! Uniforms come from ChaCha8 (53-bit mantissa draws); Gaussians use the
//! Marsaglia polar transform, which needs only `ln` and `sqrt`. Per-trial
//! seeds are derived with SplitMix64:
//!
//! ```text
//! trial_seed(master, t) = splitmix64(master ⊕ splitmix64(t + 1))
//! ```

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` under `master_seed`.
pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(trial_index.wrapping_add(1)))
}

/// Seed for a named sub-stream of `seed` (e.g. a resample).
pub fn sub_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt ^ 0xD6E8_FEB8_6659_FD93))
}

#[derive(Clone, Debug)]
pub struct SimRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }
}
