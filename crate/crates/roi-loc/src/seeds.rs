//! Deterministic seed derivation. Every randomized component draws from a
//! `ChaCha8Rng` seeded through here, so runs are reproducible from a single
//! base seed regardless of thread count or execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv1a(s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive an independent seed from a base seed, a purpose tag, and indices.
pub fn derive(base: u64, tag: &str, indices: &[u64]) -> u64 {
    let mut x = splitmix64(base ^ fnv1a(tag));
    for &i in indices {
        x = splitmix64(x ^ i);
    }
    x
}

/// RNG for a derived stream.
pub fn rng(base: u64, tag: &str, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, tag, indices))
}
