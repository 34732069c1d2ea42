//! Deterministic randomness.
//!
//! Every random draw in the crate comes from a ChaCha12 stream keyed by a
//! 64-bit master seed, a short purpose tag, and an index. Two consumers can
//! never collide as long as their purpose tags differ, and reproducing a run
//! only requires the master seed. ChaCha is counter based, so independent
//! streams are cheap and position-independent.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 finalizer; decorrelates structured seed inputs.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives the sub-seed for `(master, purpose, index)`.
///
/// The purpose tag is hashed with FNV-1a so the derivation is stable across
/// platforms and releases.
pub fn subseed(master: u64, purpose: &str, index: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in purpose.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ splitmix64(h ^ splitmix64(index)))
}

/// A ChaCha12 stream for `(master, purpose, index)`.
pub fn stream(master: u64, purpose: &str, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(subseed(master, purpose, index))
}

/// Bernoulli draw with probability `p`; exact at p = 0 and p = 1.
pub fn chance(rng: &mut ChaCha12Rng, p: f64) -> bool {
    // 53 uniform bits in [0, 1).
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < p
}

/// Uniform draw in `0..n` without modulo bias.
pub fn below(rng: &mut ChaCha12Rng, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

/// One random bit.
pub fn bit(rng: &mut ChaCha12Rng) -> bool {
    rng.next_u64() & 1 == 1
}
