//! Monte-Carlo erasure-channel simulation of a concrete code.

use alloc::vec::Vec;

use crate::codec::{bp_decode, encode_code, ConcreteCode, ErasureWord};
use crate::error::{Error, Result};
use crate::rng;

/// Aggregate outcome of a batch of frames at one channel parameter.
///
/// `wall_time_s` is filled by hosts that have a clock; it defaults to
/// zero here and is skipped by the serializers so artifacts stay
/// reproducible byte for byte.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimReport {
    pub eps: f64,
    pub n: usize,
    pub frames: u64,
    pub seed: u64,
    /// Fraction of information bits still erased after decoding.
    pub bit_erasure_rate: f64,
    /// Fraction of frames with at least one unresolved information bit.
    pub frame_error_rate: f64,
    pub mean_iterations: f64,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub wall_time_s: f64,
}

/// Runs `frames` random messages through encode, erase, decode. Message
/// bits and erasures are drawn per frame from `stream(seed, "frame", i)`,
/// so reports are reproducible and independent of batching. A decoded bit
/// that contradicts the transmitted message is a codec bug and aborts the
/// run as [`Error::Inconsistency`].
pub fn simulate(
    code: &ConcreteCode,
    eps: f64,
    frames: u64,
    seed: u64,
    max_iter: u64,
) -> Result<SimReport> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidInput(alloc::format!(
            "erasure probability must lie in [0, 1], got {eps}"
        )));
    }
    if frames == 0 {
        return Err(Error::InvalidInput(alloc::string::String::from(
            "at least one frame is required",
        )));
    }
    let k = code.info_len();
    let mut erased_bits = 0u64;
    let mut bad_frames = 0u64;
    let mut sweeps = 0u64;
    let mut u = Vec::with_capacity(k);
    for frame in 0..frames {
        let mut rg = rng::stream(seed, "frame", frame);
        u.clear();
        u.extend((0..k).map(|_| rng::bit(&mut rg)));
        let tx = encode_code(code, &u)?;
        let rx = ErasureWord {
            bits: tx
                .iter()
                .map(|&b| if rng::chance(&mut rg, eps) { None } else { Some(b) })
                .collect(),
        };
        let dec = bp_decode(code, &rx, max_iter)?;
        sweeps += dec.iterations;
        let mut erased = 0u64;
        for (m, &truth) in dec.message.iter().zip(u.iter()) {
            match m {
                None => erased += 1,
                Some(v) if *v == truth => {}
                Some(_) => {
                    return Err(Error::Inconsistency(alloc::format!(
                        "decoder declared a wrong bit in frame {frame}"
                    )))
                }
            }
        }
        erased_bits += erased;
        bad_frames += u64::from(erased > 0);
    }
    Ok(SimReport {
        eps,
        n: code.n(),
        frames,
        seed,
        bit_erasure_rate: erased_bits as f64 / (frames as f64 * k as f64),
        frame_error_rate: bad_frames as f64 / frames as f64,
        mean_iterations: sweeps as f64 / frames as f64,
        wall_time_s: 0.0,
    })
}
