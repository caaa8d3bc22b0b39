//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `&mut dyn RngCore`. Replica `i` of a
//! run seeded with `seed` uses ChaCha8 keyed by `seed` on stream `i`, so replicas
//! are independent and can be generated in any order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// The generator for replica `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw on the open interval (0, 1).
pub fn open01(rng: &mut dyn RngCore) -> f64 {
    loop {
        // 53 random mantissa bits, centred in their cell so 0 is never returned
        let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        if u < 1.0 {
            return u;
        }
    }
}
