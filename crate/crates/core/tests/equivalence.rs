//! The single-trellis encoders with structured reorderings emit exactly
//! the bits of the classic multi-trellis encoders, stream by stream.
//!
//! Streams are compared under the explicit correspondence between the two
//! variable layouts: the classic graphs order parities as produced
//! (upper, lower, inner), the single-trellis graphs put the
//! transmitted-only parity first and the fed-back parity last.

use selfcat::codec::{encode_code, instantiate, ConcreteCode};
use selfcat::graph::{
    original_ensemble_explicit, unified_equivalent, ComponentSet, TcClass,
};
use selfcat::perm::Perm;
use selfcat::rng;
use selfcat::Error;

const N: usize = 64;
const MESSAGES: usize = 100;

fn perms_for(class: TcClass, n: usize, draw: u64) -> Vec<Perm> {
    let mut rg = rng::stream(0x5eed, "equivalence", draw);
    let sizes: &[usize] = match class {
        TcClass::Pcc => &[n],
        TcClass::Scc => &[2 * n],
        TcClass::Hcc => &[n, 2 * n],
        TcClass::Bcc => &[n, n, n],
    };
    sizes.iter().map(|&s| Perm::uniform(s, &mut rg)).collect()
}

fn both_codes(class: TcClass, draw: u64) -> Result<(ConcreteCode, ConcreteCode), Error> {
    let comps = ComponentSet::default();
    let perms = perms_for(class, N, draw);
    let original = original_ensemble_explicit(class, &comps, &perms, N).unwrap();
    let unified = unified_equivalent(class, &comps, &perms, N).unwrap();
    Ok((
        instantiate(&original, N, 0)?,
        instantiate(&unified, N, 0)?,
    ))
}

/// Per class: how the unified transmitted word rearranges the original
/// one, as (original range, unified range) pairs over whole streams.
fn stream_map(class: TcClass) -> Vec<(core::ops::Range<usize>, core::ops::Range<usize>)> {
    let n = N;
    match class {
        // u, vU, vL vs u, v1 = (vU, vL)
        TcClass::Pcc => vec![(0..3 * n, 0..3 * n)],
        // u, vO, vI vs u, v1 = vI, v2 = vO
        TcClass::Scc => vec![
            (0..n, 0..n),
            (n..2 * n, 3 * n..4 * n),
            (2 * n..4 * n, n..3 * n),
        ],
        // u, vU, vL, vI vs u, v1 = vI, v2 = (vU, vL)
        TcClass::Hcc => vec![
            (0..n, 0..n),
            (n..3 * n, 3 * n..5 * n),
            (3 * n..5 * n, n..3 * n),
        ],
        // u, vU, vL vs u, v = (vU, vL)
        TcClass::Bcc => vec![(0..3 * n, 0..3 * n)],
    }
}

fn assert_equivalent(class: TcClass) {
    // The braided class has no systematic encoding when the drawn
    // feedback system is singular; skip to the next draw then, the claim
    // is quantified over encodable realizations.
    let mut draw = 0;
    let (original, unified) = loop {
        match both_codes(class, draw) {
            Ok(pair) => break pair,
            Err(Error::SingularFeedback { .. }) => draw += 1,
            Err(e) => panic!("{class}: instantiate failed: {e:?}"),
        }
        assert!(draw < 20, "{class}: no encodable draw found");
    };
    assert_eq!(original.info_len(), N);
    assert_eq!(original.info_len(), unified.info_len());
    assert_eq!(original.transmitted_len(), unified.transmitted_len());
    let map = stream_map(class);
    let mut rg = rng::stream(0x5eed, "messages", class as u64);
    for _ in 0..MESSAGES {
        let u: Vec<bool> = (0..N).map(|_| rng::bit(&mut rg)).collect();
        let a = encode_code(&original, &u).unwrap();
        let b = encode_code(&unified, &u).unwrap();
        for (oa, ob) in &map {
            assert_eq!(
                &a[oa.clone()],
                &b[ob.clone()],
                "{class}: streams {oa:?} vs {ob:?} differ"
            );
        }
    }
}

#[test]
fn parallel_class_is_bit_exact() {
    assert_equivalent(TcClass::Pcc);
}

#[test]
fn serial_class_is_bit_exact() {
    assert_equivalent(TcClass::Scc);
}

#[test]
fn hybrid_class_is_bit_exact() {
    assert_equivalent(TcClass::Hcc);
}

#[test]
fn braided_class_is_bit_exact() {
    assert_equivalent(TcClass::Bcc);
}
