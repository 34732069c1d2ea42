//! Finite-length decoder behavior against its asymptotic predictions.

use selfcat::codec::{
    bp_decode, bp_decode_traced, encode_code, instantiate, instantiate_for_decoding,
    ErasureWord,
};
use selfcat::de::{de_run, FIXED_POINT_TOL};
use selfcat::graph::{
    default_rate1_generator, unified_ensemble, unified_equivalent, ComponentSet, TcClass,
    UnifiedParams,
};
use selfcat::perm::Perm;
use selfcat::rng;
use selfcat::sim::simulate;
use selfcat::transfer::TrellisTransfer;
use selfcat::trellis::build_trellis;
use selfcat::Error;

/// Frame-error probability of the all-zero codeword under random
/// erasures; exact for any linear code on an erasure channel, and free of
/// the encoder (decode-only codes suffice).
fn all_zero_fer(code: &selfcat::codec::ConcreteCode, eps: f64, frames: u64) -> f64 {
    let mut bad = 0u64;
    for f in 0..frames {
        let mut rg = rng::stream(5, "frame", f);
        let rx = ErasureWord {
            bits: (0..code.transmitted_len())
                .map(|_| if rng::chance(&mut rg, eps) { None } else { Some(false) })
                .collect(),
        };
        let dec = bp_decode(code, &rx, 200).unwrap();
        bad += u64::from(dec.message.iter().any(|m| m.is_none()));
    }
    bad as f64 / frames as f64
}

fn bisect_crossing(mut fer: impl FnMut(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.55f64, 0.75f64);
    for _ in 0..10 {
        let mid = 0.5 * (lo + hi);
        if fer(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The erasure rate where the frame-error rate crosses one half moves
/// toward the asymptotic threshold as the block grows. The crossing is
/// located by ten bisection steps of a 40-frame estimate, so distances
/// are resolved to about one bisection cell; the slack below is two
/// cells, and the largest block must land within 0.002 of the threshold.
#[test]
fn waterfall_crossings_approach_the_asymptotic_threshold() {
    let cell = 0.2 / 1024.0;
    for (class, target) in [(TcClass::Pcc, 0.6428), (TcClass::Scc, 0.6863)] {
        let p = UnifiedParams::for_class(class);
        let g = unified_ensemble(&p, default_rate1_generator()).unwrap();
        let mut dist = Vec::new();
        for n in [1000usize, 10_000, 40_000] {
            let crossing = if class == TcClass::Pcc {
                let code = instantiate(&g, n, 91).unwrap();
                bisect_crossing(|eps| {
                    simulate(&code, eps, 40, 5, 200).unwrap().frame_error_rate
                })
            } else {
                // The uniformly mixed wiring is what the asymptotic
                // recursion models, but its feedback inversion is cubic in
                // N; the all-zero codeword needs no encoder.
                let code = instantiate_for_decoding(&g, n, 91).unwrap();
                bisect_crossing(|eps| all_zero_fer(&code, eps, 40))
            };
            dist.push((crossing - target).abs());
        }
        let name = class.name();
        assert!(
            dist[0] > dist[1] + 2.0 * cell,
            "{name}: no approach from n=1000 to n=10000: {dist:?}"
        );
        assert!(
            dist[2] <= dist[1] + 2.0 * cell,
            "{name}: moved away beyond resolution at n=40000: {dist:?}"
        );
        assert!(
            dist[2] <= 2e-3,
            "{name}: largest block missed the threshold: {dist:?}"
        );
    }
}

/// Whenever the decoder declares a bit it is the encoded bit, checked
/// over more than ten thousand frames spanning all four classes, both
/// encoder paths (causal chains and solved feedback), and channel
/// qualities from trivial to hopeless. `simulate` aborts with an error on
/// the first contradiction.
#[test]
fn declared_bits_are_always_correct_across_classes() {
    let n = 128;
    let comps = ComponentSet::default();
    let mut total = 0u64;
    for class in TcClass::ALL {
        let g = match class {
            TcClass::Pcc | TcClass::Bcc => {
                let p = UnifiedParams::for_class(class);
                unified_ensemble(&p, default_rate1_generator()).unwrap()
            }
            TcClass::Scc => {
                let mut rg = rng::stream(31, "nwb-perm", 0);
                let perms = [Perm::uniform(2 * n, &mut rg)];
                unified_equivalent(class, &comps, &perms, n).unwrap()
            }
            TcClass::Hcc => {
                let mut rg = rng::stream(31, "nwb-perm", 1);
                let perms = [Perm::uniform(n, &mut rg), Perm::uniform(2 * n, &mut rg)];
                unified_equivalent(class, &comps, &perms, n).unwrap()
            }
        };
        let code = instantiate(&g, n, 47).unwrap();
        for (i, eps) in [0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
            let frames = 700;
            let r = simulate(&code, eps, frames, 100 + i as u64, 200).unwrap();
            total += frames;
            // Short blocks keep rare stopping sets even far below
            // threshold, so only order-of-magnitude sanity is asserted.
            if eps <= 0.3 {
                assert!(r.bit_erasure_rate < 0.05, "{class} flooded at eps=0.3");
            }
            if eps >= 0.9 {
                assert!(r.bit_erasure_rate > 0.5, "{class} too clean at eps=0.9");
            }
        }
    }
    assert!(total >= 10_000, "only {total} frames");
}

/// A single big block tracks the asymptotic two-message recursion: the
/// erased fractions of the per-sweep factor messages stay within 0.02 of
/// the recursion's trajectory for the first twenty sweeps.
#[test]
fn big_block_decoder_tracks_the_asymptotic_recursion() {
    let n = 100_000;
    let eps = 0.6;
    let params = UnifiedParams::for_class(TcClass::Pcc);
    let g = unified_ensemble(&params, default_rate1_generator()).unwrap();
    let code = instantiate(&g, n, 3).unwrap();
    let mut rg = rng::stream(3, "frame", 0);
    let u: Vec<bool> = (0..n).map(|_| rng::bit(&mut rg)).collect();
    let tx = encode_code(&code, &u).unwrap();
    let rx = ErasureWord {
        bits: tx
            .iter()
            .map(|&b| if rng::chance(&mut rg, eps) { None } else { Some(b) })
            .collect(),
    };
    let mut trace = Vec::new();
    bp_decode_traced(&code, &rx, 1000, &mut |x1, x2| trace.push((x1, x2))).unwrap();

    let tr = build_trellis(&[default_rate1_generator()]).unwrap();
    let transfer = TrellisTransfer::new(&tr).unwrap();
    let de = de_run(&params, eps, &transfer, 1000, FIXED_POINT_TOL).unwrap();
    // Sweep i of the decoder corresponds to iterate i+1 of the recursion
    // (iterate 0 is the all-erased start). Once either side settles, its
    // last value persists.
    let at = |v: &[(f64, f64)], i: usize| v[i.min(v.len() - 1)];
    for i in 0..20 {
        let (sx1, sx2) = at(&trace, i);
        let d = &de.trace[(i + 1).min(de.trace.len() - 1)];
        assert!(
            (sx1 - d.x1).abs() <= 0.02 && (sx2 - d.x2).abs() <= 0.02,
            "sweep {i}: ({sx1:.4}, {sx2:.4}) vs ({:.4}, {:.4})",
            d.x1,
            d.x2
        );
    }
}

/// Decode-only instantiation refuses to encode but decodes identically to
/// the fully planned code. Explicit interleavers keep the two
/// instantiations on the same wiring (no resampling on either path).
#[test]
fn decoder_only_instantiation_matches_the_planned_code() {
    let n = 64;
    let comps = ComponentSet::default();
    let mut rg = rng::stream(8, "lean-perm", 0);
    let (g, full) = loop {
        let perms = [
            Perm::uniform(n, &mut rg),
            Perm::uniform(n, &mut rg),
            Perm::uniform(n, &mut rg),
        ];
        let g = unified_equivalent(TcClass::Bcc, &comps, &perms, n).unwrap();
        match instantiate(&g, n, 8) {
            Ok(code) => break (g, code),
            Err(Error::SingularFeedback { .. }) => continue,
            Err(e) => panic!("unexpected failure: {e:?}"),
        }
    };
    let lean = instantiate_for_decoding(&g, n, 8).unwrap();
    assert!(matches!(
        encode_code(&lean, &vec![false; n]),
        Err(Error::InvalidInput(_))
    ));
    let mut rg = rng::stream(8, "frame", 0);
    let u: Vec<bool> = (0..n).map(|_| rng::bit(&mut rg)).collect();
    let tx = encode_code(&full, &u).unwrap();
    let rx = ErasureWord {
        bits: tx
            .iter()
            .map(|&b| if rng::chance(&mut rg, 0.4) { None } else { Some(b) })
            .collect(),
    };
    let a = bp_decode(&full, &rx, 100).unwrap();
    let b = bp_decode(&lean, &rx, 100).unwrap();
    assert_eq!(a.message, b.message);
    assert_eq!(a.iterations, b.iterations);
}
