//! Deterministic RNG stream derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by
//! (seed, domain, t, k). Streams are independent of evaluation order and
//! of the worker count, which is what makes the parallel paths bitwise
//! reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draw domains. Each consumer of randomness owns one tag so streams
/// never collide across subsystems.
#[derive(Debug, Clone, Copy)]
pub enum Domain {
    Init,
    Topology,
    Coefficients,
    PMatrix,
    Sweep,
    Selector,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Init => 0x01,
            Domain::Topology => 0x02,
            Domain::Coefficients => 0x03,
            Domain::PMatrix => 0x04,
            Domain::Sweep => 0x05,
            Domain::Selector => 0x06,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// ChaCha8 stream for (seed, domain, t, k).
pub fn stream(seed: u64, domain: Domain, t: u64, k: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed ^ domain.tag().wrapping_mul(0xa076_1d64_78bd_642f)) ^ t) ^ k);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(splitmix64(key ^ 0x5851_f42d_4c95_7f2d));
    rng
}
