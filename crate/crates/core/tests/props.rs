//! Cross-module properties: order relations of the erasure recursions,
//! algebraic identities, and the randomized bijection/inversion checks.

use proptest::prelude::*;
use selfcat::de::{de_run, de_step, DeState};
use selfcat::gf2::BitMatrix;
use selfcat::graph::{default_rate1_generator, TcClass, UnifiedParams};
use selfcat::perm::Perm;
use selfcat::rng;
use selfcat::transfer::TrellisTransfer;
use selfcat::trellis::{build_trellis, Termination, Trellis};

fn five_seven() -> TrellisTransfer {
    TrellisTransfer::new(&build_trellis(&[default_rate1_generator()]).unwrap()).unwrap()
}

/// Trajectories are pointwise nondecreasing in the channel erasure
/// probability, for every class and every iteration.
#[test]
fn trajectories_dominate_in_channel_quality() {
    let tr = five_seven();
    for class in TcClass::ALL {
        let params = UnifiedParams::for_class(class);
        let mut prev: Option<Vec<DeState>> = None;
        for k in 1..10 {
            let eps = 0.1 * k as f64;
            let run = de_run(&params, eps, &tr, 50, 0.0_f64.max(1e-300)).unwrap();
            if let Some(lo) = prev {
                for (a, b) in lo.iter().zip(run.trace.iter()) {
                    assert!(b.x1 >= a.x1 - 1e-12 && b.x2 >= a.x2 - 1e-12, "{class}");
                }
            }
            prev = Some(run.trace);
        }
    }
}

/// From the all-erased start the iterates never increase.
#[test]
fn iterates_are_monotone_in_the_iteration() {
    let tr = five_seven();
    for class in TcClass::ALL {
        let params = UnifiedParams::for_class(class);
        for eps in [0.2, 0.5, 0.65, 0.8, 0.95] {
            let run = de_run(&params, eps, &tr, 200, 1e-14).unwrap();
            for w in run.trace.windows(2) {
                assert!(
                    w[1].x1 <= w[0].x1 + 1e-12 && w[1].x2 <= w[0].x2 + 1e-12,
                    "{class} at eps {eps}"
                );
            }
        }
    }
}

/// Both transfer outputs are nondecreasing in each argument and stay in
/// [0, 1], on a 21x21 grid, for the default rate-1, the accumulator, and
/// the two-input braided component.
#[test]
fn transfer_is_monotone_and_bounded_on_the_grid() {
    let trellises = [
        build_trellis(&[default_rate1_generator()]).unwrap(),
        Trellis::from_octal("1/3").unwrap(),
        build_trellis(&selfcat::graph::default_rate2_generators()).unwrap(),
    ];
    for t in &trellises {
        let tt = TrellisTransfer::new(t).unwrap();
        let positions = t.input_arity() + 1;
        let grid: Vec<f64> = (0..21).map(|i| i as f64 / 20.0).collect();
        let eval = |y1: f64, y2: f64| -> Vec<f64> {
            let mut priors = vec![y1; positions];
            priors[positions - 1] = y2;
            tt.eval(&priors).unwrap()
        };
        for &y1 in &grid {
            for &y2 in &grid {
                let out = eval(y1, y2);
                for &f in &out {
                    assert!((0.0..=1.0 + 1e-12).contains(&f), "range at ({y1}, {y2})");
                }
                if y1 > 0.0 {
                    let left = eval(y1 - 0.05, y2);
                    for (a, b) in left.iter().zip(out.iter()) {
                        assert!(b + 1e-12 >= *a, "y1 monotonicity at ({y1}, {y2})");
                    }
                }
                if y2 > 0.0 {
                    let below = eval(y1, y2 - 0.05);
                    for (a, b) in below.iter().zip(out.iter()) {
                        assert!(b + 1e-12 >= *a, "y2 monotonicity at ({y1}, {y2})");
                    }
                }
            }
        }
        // No knowledge in, no knowledge out; certainty in, certainty out.
        let all_erased = eval(1.0, 1.0);
        assert!(all_erased.iter().all(|&f| f == 1.0));
        let all_known = eval(0.0, 0.0);
        assert!(all_known.iter().all(|&f| f == 0.0));
    }
}

/// The a-posteriori erasure probability carried by every iterate is
/// exactly the channel term times the information-side extrinsic raised
/// to the repeat degree (grouped as eps * (x1 * x1) for degree two).
#[test]
fn a_posteriori_identity_holds_along_runs() {
    let tr = five_seven();
    for class in [TcClass::Pcc, TcClass::Scc] {
        let params = UnifiedParams::for_class(class);
        assert_eq!(params.q(), 2);
        for eps in [0.3, 0.6, 0.9] {
            let run = de_run(&params, eps, &tr, 60, 1e-12).unwrap();
            for st in &run.trace {
                assert_eq!(st.p_a, eps * (st.x1 * st.x1), "{class} at eps {eps}");
            }
        }
    }
}

/// With the parallel row (two information copies, nothing fed back) the
/// two-message recursion collapses to x1 <- f1(eps * x1, eps), bit for
/// bit.
#[test]
fn parallel_row_reduces_to_the_scalar_recursion() {
    let tr = five_seven();
    let params = UnifiedParams::for_class(TcClass::Pcc);
    for eps in [0.1, 0.4, 0.6428, 0.9] {
        let mut state = DeState::start(&params, eps);
        for _ in 0..30 {
            let next = de_step(&params, eps, &state, &tr).unwrap();
            let direct = tr.eval(&[eps * state.x1, eps]).unwrap();
            assert_eq!(next.x1, direct[0]);
            assert_eq!(next.x2, direct[1]);
            state = next;
        }
    }
}

/// Re-encoding the output of a rate-1 recursive encoder through the
/// swapped generator recovers the input: 5/7 composed with 7/5 is the
/// identity map on sequences.
#[test]
fn rate_one_encoders_invert_by_swapping_the_generator() {
    let fwd = Trellis::from_octal("5/7").unwrap();
    let bwd = Trellis::from_octal("7/5").unwrap();
    let mut rg = rng::stream(2024, "invert", 0);
    for len in [1usize, 5, 31, 128] {
        for _ in 0..25 {
            let u: Vec<bool> = (0..len).map(|_| rng::bit(&mut rg)).collect();
            let v = fwd.encode(&u, Termination::Unterminated).unwrap();
            let back = bwd.encode(&v, Termination::Unterminated).unwrap();
            assert_eq!(back, u);
        }
    }
}

proptest! {
    /// Uniform draws are bijections, and applying a permutation then its
    /// inverse is the identity on any payload.
    #[test]
    fn permutations_are_bijective_and_invertible(seed in 0u64..1000, n in 1usize..200) {
        let mut rg = rng::stream(seed, "prop-perm", 0);
        let p = Perm::uniform(n, &mut rg);
        let mut seen = vec![false; n];
        for i in 0..n {
            let s = p.src(i);
            prop_assert!(!seen[s]);
            seen[s] = true;
        }
        let x: Vec<u32> = (0..n as u32).collect();
        let y = p.apply(&x);
        let back = p.inverse().apply(&y);
        prop_assert_eq!(back, x);
    }

    /// A matrix built from an invertible system multiplies with its
    /// inverse to the identity, in both orders.
    #[test]
    fn bit_matrix_inverse_roundtrips(seed in 0u64..500, n in 1usize..48) {
        let mut rg = rng::stream(seed, "prop-gf2", 0);
        let mut m = BitMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                if rng::bit(&mut rg) {
                    m.set(r, c, true);
                }
            }
        }
        if let Some(inv) = m.inverse() {
            let eye = BitMatrix::identity(n);
            prop_assert_eq!(m.mul(&inv), eye.clone());
            prop_assert_eq!(inv.mul(&m), eye);
        }
    }
}
