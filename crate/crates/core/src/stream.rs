//! Counter-based random substreams.
//!
//! A substream is addressed by `(seed, domain, index)`: the seed and domain
//! form the ChaCha key and the index selects the ChaCha stream. Words within a
//! stream are consumed in a fixed order, so draw `k` of substream `i` depends
//! only on `(seed, domain, i, k)` and never on how samples are scheduled.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Separates the key space of independent consumers of the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Alpha = 0x616c_7068_6100_0001,
    CircleAngles = 0x616e_676c_6500_0002,
}

#[derive(Debug, Clone)]
pub struct Substream {
    rng: ChaCha8Rng,
}

impl Substream {
    pub fn new(seed: u64, domain: Domain, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        Self { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform angle in `[0, 2π)`.
    pub fn next_angle(&mut self) -> f64 {
        std::f64::consts::TAU * self.next_unit()
    }
}
