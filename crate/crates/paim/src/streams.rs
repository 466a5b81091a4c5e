//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, domain)` and
//! positioned on substream `index`, so draws for one work unit never depend
//! on which thread ran it or on how many units ran before.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Small-scale fading, transmitted bits and noise of one work unit.
    SmallScale = 1,
    /// Shadowing and LoS states of one large-scale block.
    LargeScale = 2,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
