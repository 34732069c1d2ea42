//! Exact extrinsic erasure transfer functions of MAP trellis decoding on
//! the binary erasure channel.
//!
//! On the BEC a MAP decoder never weighs evidence; it only knows or does
//! not know. Its forward (and backward) recursion therefore carries a
//! *set* of states still consistent with everything observed so far. For
//! a linear trellis code we may condition on the all-zero codeword, and
//! the knowledge set then evolves as a Markov chain over subsets of the
//! state space, driven by the i.i.d. erasure pattern of each section.
//! The chain starts at the singleton {0}: boundaries are pinned, and the
//! interior of a long trellis sees the chain's limit distribution.
//!
//! The extrinsic estimate of one bit combines an independent forward set,
//! backward set and the erasure pattern of the remaining labels in its
//! own section; it stays erased iff the surviving transitions disagree on
//! that bit. Everything here is exact up to the stationary-distribution
//! tolerance; [`monte_carlo_transfer`] estimates the same quantities from
//! an actual decoder run on random data and arbitrates.
//!
//! Positions within a section are indexed inputs first, parity last, so a
//! single-input trellis has position 0 = input (the `y1`/`f1` side) and
//! position 1 = parity (`y2`/`f2`).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng;
use crate::trellis::Trellis;

/// Decoder knowledge at a trellis boundary: a nonempty set of states,
/// bit `s` set iff state `s` is still possible.
pub type SubsetState = u32;

/// Distribution over knowledge sets, normalized to sum 1.
#[derive(Debug, Clone)]
pub struct SubsetDistribution {
    sets: Vec<SubsetState>,
    probs: Vec<f64>,
}

impl SubsetDistribution {
    pub fn sets(&self) -> &[SubsetState] {
        &self.sets
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of the given knowledge set (0 if unreachable).
    pub fn prob_of(&self, set: SubsetState) -> f64 {
        self.sets
            .iter()
            .position(|&s| s == set)
            .map_or(0.0, |i| self.probs[i])
    }

    /// Total mass on single-state sets.
    pub fn singleton_mass(&self) -> f64 {
        self.sets
            .iter()
            .zip(&self.probs)
            .filter(|(s, _)| s.count_ones() == 1)
            .map(|(_, &p)| p)
            .sum()
    }
}

/// Stationary-distribution tolerance (L1 between successive iterates).
const CHAIN_TOL: f64 = 1e-14;
/// Iterations before damping kicks in to break periodic chains.
const UNDAMPED_ITERS: u64 = 512;
const CHAIN_ITER_CAP: u64 = 1_000_000;

/// One direction's subset chain, fully tabulated: `next[set * patterns +
/// pattern]` is the successor set index. Pattern bit `p` set means the
/// label at position `p` is erased.
struct ChainTables {
    sets: Vec<SubsetState>,
    next: Vec<u32>,
}

impl ChainTables {
    /// Discovers every set reachable from {0} under any erasure pattern.
    /// `lab[s << arity | u]` packs the section labels, `nx` the successor
    /// state. A transition survives a pattern iff its labels are zero
    /// wherever the pattern observes (all-zero conditioning).
    fn build(lab: &[u32], nx: &[u16], states: usize, arity: usize, patterns: usize) -> Self {
        let observe_mask = (patterns - 1) as u32;
        let image = |set: SubsetState, pat: usize| -> SubsetState {
            let mut img = 0u32;
            for s in 0..states {
                if set >> s & 1 == 0 {
                    continue;
                }
                for u in 0..(1 << arity) {
                    let idx = s << arity | u;
                    if lab[idx] & !(pat as u32) & observe_mask == 0 {
                        img |= 1 << nx[idx];
                    }
                }
            }
            img
        };
        let mut sets: Vec<SubsetState> = vec![1];
        let mut next: Vec<u32> = Vec::new();
        let mut done = 0;
        while done < sets.len() {
            let set = sets[done];
            for pat in 0..patterns {
                let img = image(set, pat);
                let idx = match sets.iter().position(|&s| s == img) {
                    Some(i) => i,
                    None => {
                        sets.push(img);
                        sets.len() - 1
                    }
                };
                next.push(idx as u32);
            }
            done += 1;
        }
        ChainTables { sets, next }
    }

    /// Stationary distribution of the pattern-averaged chain. The chains
    /// are tiny (at most 2^states sets, in practice a few dozen), so the
    /// balance equations are solved directly; the start at {0} guarantees
    /// a single recurrent class, making the normalized system regular.
    /// Power iteration remains as a fallback should elimination stall.
    fn stationary(&self, pat_prob: &[f64]) -> Result<Vec<f64>> {
        let n = self.sets.len();
        let patterns = pat_prob.len();
        // a = P^T - I with the last balance equation swapped for the
        // normalization sum(pi) = 1; solve a * pi = e_last.
        let mut a = vec![0.0f64; n * n];
        for s in 0..n {
            for (pat, &pp) in pat_prob.iter().enumerate() {
                if pp != 0.0 {
                    let t = self.next[s * patterns + pat] as usize;
                    a[t * n + s] += pp;
                }
            }
        }
        for i in 0..n {
            a[i * n + i] -= 1.0;
        }
        let mut rhs = vec![0.0f64; n];
        rhs[n - 1] = 1.0;
        a[(n - 1) * n..].iter_mut().for_each(|x| *x = 1.0);
        let mut ok = true;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[i * n + col]
                        .abs()
                        .total_cmp(&a[j * n + col].abs())
                })
                .unwrap();
            if a[pivot * n + col].abs() < 1e-12 {
                ok = false;
                break;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                rhs.swap(col, pivot);
            }
            let inv = 1.0 / a[col * n + col];
            for row in col + 1..n {
                let factor = a[row * n + col] * inv;
                if factor == 0.0 {
                    continue;
                }
                for k in col..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
        if ok {
            let mut pi = vec![0.0f64; n];
            for row in (0..n).rev() {
                let mut acc = rhs[row];
                for k in row + 1..n {
                    acc -= a[row * n + k] * pi[k];
                }
                pi[row] = acc / a[row * n + row];
            }
            pi.iter_mut().for_each(|x| *x = x.max(0.0));
            let total: f64 = pi.iter().sum();
            if total > 0.0 {
                pi.iter_mut().for_each(|x| *x /= total);
                return Ok(pi);
            }
        }
        self.stationary_iterative(pat_prob)
    }

    /// Damping (half-step averaging) starts only if plain iteration has
    /// not settled, so aperiodic chains converge at full speed while
    /// periodic ones still average out.
    fn stationary_iterative(&self, pat_prob: &[f64]) -> Result<Vec<f64>> {
        let n = self.sets.len();
        let patterns = pat_prob.len();
        let mut dist = vec![0.0; n];
        dist[0] = 1.0;
        let mut fresh = vec![0.0; n];
        for iter in 0..CHAIN_ITER_CAP {
            fresh.iter_mut().for_each(|x| *x = 0.0);
            for s in 0..n {
                let p = dist[s];
                if p == 0.0 {
                    continue;
                }
                for (pat, &pp) in pat_prob.iter().enumerate() {
                    if pp != 0.0 {
                        fresh[self.next[s * patterns + pat] as usize] += p * pp;
                    }
                }
            }
            if iter >= UNDAMPED_ITERS {
                for (f, &d) in fresh.iter_mut().zip(dist.iter()) {
                    *f = 0.5 * *f + 0.5 * d;
                }
            }
            let total: f64 = fresh.iter().sum();
            fresh.iter_mut().for_each(|x| *x /= total);
            let l1: f64 = fresh.iter().zip(&dist).map(|(a, b)| (a - b).abs()).sum();
            core::mem::swap(&mut dist, &mut fresh);
            if l1 < CHAIN_TOL {
                return Ok(dist);
            }
        }
        Err(Error::NonConvergence {
            iterations: CHAIN_ITER_CAP,
        })
    }
}

/// Precomputed exact transfer function of one trellis. Construction pays
/// for the subset chains and extrinsic tables once; evaluation at a
/// probability point costs two small power iterations.
pub struct TrellisTransfer {
    positions: usize,
    patterns: usize,
    fwd: ChainTables,
    bwd: ChainTables,
    /// Per position `p`: indexed `[(a * bwd_sets + b) * patterns + pat]`
    /// with pattern bit `p` clear; true iff the extrinsic at `p` stays
    /// erased given forward set `a`, backward set `b` and the erasure
    /// pattern of the other labels.
    ext: Vec<Vec<bool>>,
}

impl TrellisTransfer {
    pub fn new(trellis: &Trellis) -> Result<Self> {
        let states = trellis.state_count();
        if states > 32 {
            return Err(Error::InvalidInput(format!(
                "exact transfer supports up to 32 states, trellis has {states}"
            )));
        }
        let arity = trellis.input_arity();
        let positions = arity + 1;
        let patterns = 1usize << positions;

        // Section labels packed as input bits then parity bit.
        let mut lab = vec![0u32; states << arity];
        let mut nx = vec![0u16; states << arity];
        for s in 0..states {
            for u in 0..(1 << arity) {
                let (ns, v) = trellis.step(s, u);
                lab[s << arity | u] = (u as u32) | (v as u32) << arity;
                nx[s << arity | u] = ns as u16;
            }
        }
        let reversed = trellis.reversed()?;
        let mut rlab = vec![0u32; states << arity];
        let mut rnx = vec![0u16; states << arity];
        for s in 0..states {
            for u in 0..(1 << arity) {
                let (ns, v) = reversed.step(s, u);
                rlab[s << arity | u] = (u as u32) | (v as u32) << arity;
                rnx[s << arity | u] = ns as u16;
            }
        }

        let fwd = ChainTables::build(&lab, &nx, states, arity, patterns);
        let bwd = ChainTables::build(&rlab, &rnx, states, arity, patterns);

        // A forward set A (before the section), a backward set B (after
        // it) and an erasure pattern on the other labels leave position p
        // erased iff some surviving transition labels it 1; the all-zero
        // path always supplies a 0.
        let observe_mask = (patterns - 1) as u32;
        let mut ext = Vec::with_capacity(positions);
        for p in 0..positions {
            let own = 1u32 << p;
            let mut table = vec![false; fwd.sets.len() * bwd.sets.len() * patterns];
            for (a, &aset) in fwd.sets.iter().enumerate() {
                for (b, &bset) in bwd.sets.iter().enumerate() {
                    for pat in 0..patterns {
                        if pat as u32 & own != 0 {
                            continue;
                        }
                        let mut erased = false;
                        'scan: for s in 0..states {
                            if aset >> s & 1 == 0 {
                                continue;
                            }
                            for u in 0..(1 << arity) {
                                let idx = s << arity | u;
                                if bset >> nx[idx] & 1 == 1
                                    && lab[idx] & !(pat as u32 | own) & observe_mask == 0
                                    && lab[idx] & own != 0
                                {
                                    erased = true;
                                    break 'scan;
                                }
                            }
                        }
                        table[(a * bwd.sets.len() + b) * patterns + pat] = erased;
                    }
                }
            }
            ext.push(table);
        }
        Ok(TrellisTransfer {
            positions,
            patterns,
            fwd,
            bwd,
            ext,
        })
    }

    /// Positions per section: inputs first, parity last.
    pub fn positions(&self) -> usize {
        self.positions
    }

    /// Extrinsic erasure probability per position, given the erasure
    /// probability of each position's incoming message. Outputs are
    /// clamped to [0,1] against rounding.
    pub fn eval(&self, priors: &[f64]) -> Result<Vec<f64>> {
        if priors.len() != self.positions {
            return Err(Error::LengthMismatch {
                expected: self.positions,
                got: priors.len(),
            });
        }
        for &e in priors {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidInput(format!(
                    "erasure probability {e} outside [0,1]"
                )));
            }
        }
        let mut pat_prob = vec![0.0; self.patterns];
        for (pat, pp) in pat_prob.iter_mut().enumerate() {
            *pp = priors.iter().enumerate().fold(1.0, |acc, (p, &e)| {
                acc * if pat >> p & 1 == 1 { e } else { 1.0 - e }
            });
        }
        let pf = self.fwd.stationary(&pat_prob)?;
        let pb = self.bwd.stationary(&pat_prob)?;

        let nb = self.bwd.sets.len();
        let mut out = Vec::with_capacity(self.positions);
        for (p, table) in self.ext.iter().enumerate() {
            let mut f = 0.0;
            for pat in 0..self.patterns {
                if pat >> p & 1 == 1 {
                    continue;
                }
                // Pattern probability over the other positions only; the
                // extrinsic ignores its own incoming message.
                let mut pr = 1.0;
                for (q, &e) in priors.iter().enumerate() {
                    if q != p {
                        pr *= if pat >> q & 1 == 1 { e } else { 1.0 - e };
                    }
                }
                if pr == 0.0 {
                    continue;
                }
                let mut acc = 0.0;
                for (a, &pa) in pf.iter().enumerate() {
                    if pa == 0.0 {
                        continue;
                    }
                    for (b, &pbv) in pb.iter().enumerate() {
                        if pbv != 0.0 && table[(a * nb + b) * self.patterns + pat] {
                            acc += pa * pbv;
                        }
                    }
                }
                f += pr * acc;
            }
            out.push(f.clamp(0.0, 1.0));
        }
        Ok(out)
    }

    /// Limit distribution of the forward knowledge-set chain at the given
    /// per-position erasure probabilities.
    pub fn forward_distribution(&self, priors: &[f64]) -> Result<SubsetDistribution> {
        self.side_distribution(&self.fwd, priors)
    }

    /// Same for the backward chain (the forward chain of the reversed
    /// trellis).
    pub fn backward_distribution(&self, priors: &[f64]) -> Result<SubsetDistribution> {
        self.side_distribution(&self.bwd, priors)
    }

    fn side_distribution(&self, side: &ChainTables, priors: &[f64]) -> Result<SubsetDistribution> {
        if priors.len() != self.positions {
            return Err(Error::LengthMismatch {
                expected: self.positions,
                got: priors.len(),
            });
        }
        let mut pat_prob = vec![0.0; self.patterns];
        for (pat, pp) in pat_prob.iter_mut().enumerate() {
            *pp = priors.iter().enumerate().fold(1.0, |acc, (p, &e)| {
                acc * if pat >> p & 1 == 1 { e } else { 1.0 - e }
            });
        }
        Ok(SubsetDistribution {
            sets: side.sets.clone(),
            probs: side.stationary(&pat_prob)?,
        })
    }
}

fn uniform_priors(t: &Trellis, y1: f64, y2: f64) -> Vec<f64> {
    let mut priors = vec![y1; t.input_arity()];
    priors.push(y2);
    priors
}

/// Limit distribution of the forward knowledge-set chain with erasure
/// probability `y1` on every input label and `y2` on the parity label.
pub fn forward_chain(t: &Trellis, y1: f64, y2: f64) -> Result<SubsetDistribution> {
    TrellisTransfer::new(t)?.forward_distribution(&uniform_priors(t, y1, y2))
}

/// Backward counterpart of [`forward_chain`].
pub fn backward_chain(t: &Trellis, y1: f64, y2: f64) -> Result<SubsetDistribution> {
    TrellisTransfer::new(t)?.backward_distribution(&uniform_priors(t, y1, y2))
}

/// Exact `(f1, f2)`: extrinsic erasure probability toward the input side
/// (averaged over input positions) and toward the parity side, when input
/// messages are erased w.p. `y1` and parity messages w.p. `y2`. Callers
/// evaluating many points should hold a [`TrellisTransfer`] instead.
pub fn transfer(t: &Trellis, y1: f64, y2: f64) -> Result<(f64, f64)> {
    let tt = TrellisTransfer::new(t)?;
    let out = tt.eval(&uniform_priors(t, y1, y2))?;
    let k = t.input_arity();
    let f1 = out[..k].iter().sum::<f64>() / k as f64;
    Ok((f1, out[k]))
}

/// Monte Carlo estimate of the transfer function from a real decoder run.
#[derive(Debug, Clone, PartialEq)]
pub struct McTransfer {
    pub f1: f64,
    pub f2: f64,
    pub stderr1: f64,
    pub stderr2: f64,
}

/// Sections dropped at each end before measuring, to reach steady state.
const MC_MARGIN: usize = 64;

/// Simulates one long trellis on random data: every label is erased
/// independently per its position probability, the set-valued forward and
/// backward sweeps run in the value domain, and the fraction of extrinsic
/// outputs still erased is measured over the interior sections.
///
/// Standard errors come from batch means rather than raw binomial counts:
/// neighboring sections share knowledge sets, so their indicators are
/// serially correlated and the binomial formula would understate the
/// error. For independent samples the two coincide.
pub fn monte_carlo_transfer(
    t: &Trellis,
    y1: f64,
    y2: f64,
    sections: usize,
    seed: u64,
) -> Result<McTransfer> {
    let (means, errs) = monte_carlo_positions(t, &uniform_priors(t, y1, y2), sections, seed)?;
    let k = t.input_arity();
    // Input positions sit in the same section, so their batch means were
    // already averaged jointly; position 0 carries the combined row.
    Ok(McTransfer {
        f1: means[..k].iter().sum::<f64>() / k as f64,
        f2: means[k],
        stderr1: errs[0],
        stderr2: errs[k],
    })
}

/// Per-position Monte Carlo transfer estimate; see
/// [`monte_carlo_transfer`]. Returns (means, batch-means standard errors),
/// one entry per position.
pub fn monte_carlo_positions(
    t: &Trellis,
    priors: &[f64],
    sections: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let arity = t.input_arity();
    let positions = arity + 1;
    if priors.len() != positions {
        return Err(Error::LengthMismatch {
            expected: positions,
            got: priors.len(),
        });
    }
    for &e in priors {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::InvalidInput(format!(
                "erasure probability {e} outside [0,1]"
            )));
        }
    }
    if t.state_count() > 32 {
        return Err(Error::InvalidInput(String::from(
            "set-valued sweeps support up to 32 states",
        )));
    }
    if sections < 10_000 {
        return Err(Error::InvalidInput(format!(
            "need at least 10000 sections for a steady-state estimate, got {sections}"
        )));
    }

    let states = t.state_count();
    let symbols = 1usize << arity;
    let mut lab = vec![0u32; states << arity];
    let mut nx = vec![0u8; states << arity];
    for s in 0..states {
        for u in 0..symbols {
            let (ns, v) = t.step(s, u);
            lab[s << arity | u] = (u as u32) | (v as u32) << arity;
            nx[s << arity | u] = ns as u8;
        }
    }

    // True path on random inputs, plus the erasure mask per section
    // (bit p set = position p observed).
    let mut rng_data = rng::stream(seed, "mc-transfer-data", 0);
    let mut rng_chan = rng::stream(seed, "mc-transfer-chan", 0);
    let mut true_lab = vec![0u32; sections];
    let mut obs = vec![0u32; sections];
    let mut state = 0usize;
    for sec in 0..sections {
        let u = rng::below(&mut rng_data, symbols);
        let idx = state << arity | u;
        true_lab[sec] = lab[idx];
        state = usize::from(nx[idx]);
        let mut mask = 0u32;
        for (p, &e) in priors.iter().enumerate() {
            if !rng::chance(&mut rng_chan, e) {
                mask |= 1 << p;
            }
        }
        obs[sec] = mask;
    }
    let final_state = state;

    // Forward knowledge sets in the value domain: a transition survives
    // iff its labels match the true labels wherever observed.
    let mut fwd = vec![0u32; sections + 1];
    fwd[0] = 1;
    for sec in 0..sections {
        let mut img = 0u32;
        let set = fwd[sec];
        for s in 0..states {
            if set >> s & 1 == 0 {
                continue;
            }
            for u in 0..symbols {
                let idx = s << arity | u;
                if (lab[idx] ^ true_lab[sec]) & obs[sec] == 0 {
                    img |= 1 << nx[idx];
                }
            }
        }
        fwd[sec + 1] = img;
    }
    let mut bwd = vec![0u32; sections + 1];
    bwd[sections] = 1 << final_state;
    for sec in (0..sections).rev() {
        let mut img = 0u32;
        for s in 0..states {
            for u in 0..symbols {
                let idx = s << arity | u;
                if bwd[sec + 1] >> nx[idx] & 1 == 1 && (lab[idx] ^ true_lab[sec]) & obs[sec] == 0 {
                    img |= 1 << s;
                    break;
                }
            }
        }
        bwd[sec] = img;
    }

    // Extrinsic indicators over the interior, accumulated per batch.
    let lo = MC_MARGIN;
    let hi = sections - MC_MARGIN;
    let interior = hi - lo;
    let batches = (interior / 400).clamp(16, 256);
    let mut batch_sum = vec![0u64; positions * batches];
    let mut batch_n = vec![0u64; batches];
    for sec in lo..hi {
        let batch = (sec - lo) * batches / interior;
        batch_n[batch] += 1;
        for p in 0..positions {
            let own = 1u32 << p;
            let other = obs[sec] & !own;
            let mut seen = 0u32;
            for s in 0..states {
                if fwd[sec] >> s & 1 == 0 {
                    continue;
                }
                for u in 0..symbols {
                    let idx = s << arity | u;
                    if bwd[sec + 1] >> nx[idx] & 1 == 1 && (lab[idx] ^ true_lab[sec]) & other == 0 {
                        seen |= 1 << (lab[idx] >> p & 1);
                    }
                }
            }
            debug_assert_ne!(seen, 0, "true path must survive");
            debug_assert_ne!(seen & (1 << (true_lab[sec] >> p & 1)), 0);
            if seen == 0b11 {
                batch_sum[p * batches + batch] += 1;
            }
        }
    }

    let mut means = Vec::with_capacity(positions);
    let mut errs = Vec::with_capacity(positions);
    for p in 0..positions {
        let ms: Vec<f64> = (0..batches)
            .map(|b| batch_sum[p * batches + b] as f64 / batch_n[b] as f64)
            .collect();
        let mean = ms.iter().sum::<f64>() / batches as f64;
        let var = ms.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
            / (batches as f64 - 1.0);
        means.push(mean);
        errs.push(libm::sqrt(var / batches as f64));
    }
    // Joint input-side estimate for multi-input trellises: average the
    // input rows per batch so the stderr reflects the averaged series.
    if arity > 1 {
        let ms: Vec<f64> = (0..batches)
            .map(|b| {
                (0..arity)
                    .map(|p| batch_sum[p * batches + b] as f64)
                    .sum::<f64>()
                    / (arity as f64 * batch_n[b] as f64)
            })
            .collect();
        let mean = ms.iter().sum::<f64>() / batches as f64;
        let var = ms.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
            / (batches as f64 - 1.0);
        errs[0] = libm::sqrt(var / batches as f64);
        let _ = mean;
    }
    Ok((means, errs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::Trellis;

    fn tt(octal: &str) -> TrellisTransfer {
        TrellisTransfer::new(&Trellis::from_octal(octal).unwrap()).unwrap()
    }

    #[test]
    fn accumulator_matches_hand_solved_chain() {
        // For 1/(1+D) the two-set chains solve by hand. At y1=y2=1/2 the
        // forward chain holds the singleton w.p. 2/3, the backward w.p.
        // 1/3, and combining patterns gives f1 = 5/9, f2 = 4/9.
        let t = Trellis::from_octal("1/3").unwrap();
        let (f1, f2) = transfer(&t, 0.5, 0.5).unwrap();
        assert!((f1 - 5.0 / 9.0).abs() < 1e-12, "f1 = {f1}");
        assert!((f2 - 4.0 / 9.0).abs() < 1e-12, "f2 = {f2}");
        let fd = forward_chain(&t, 0.5, 0.5).unwrap();
        assert!((fd.prob_of(0b01) - 2.0 / 3.0).abs() < 1e-12);
        assert!((fd.prob_of(0b11) - 1.0 / 3.0).abs() < 1e-12);
        let bd = backward_chain(&t, 0.5, 0.5).unwrap();
        assert!((bd.prob_of(0b01) - 1.0 / 3.0).abs() < 1e-12);
        assert!((bd.prob_of(0b11) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_side_information_reveals_the_other_side() {
        for octal in ["5/7", "1/3", "15/13"] {
            let t = Trellis::from_octal(octal).unwrap();
            for y in [0.0, 0.3, 0.8, 1.0] {
                let (f1, _) = transfer(&t, y, 0.0).unwrap();
                assert_eq!(f1, 0.0, "{octal}: f1({y}, 0)");
                let (_, f2) = transfer(&t, 0.0, y).unwrap();
                assert_eq!(f2, 0.0, "{octal}: f2(0, {y})");
            }
        }
    }

    #[test]
    fn no_observations_no_knowledge() {
        for octal in ["5/7", "1/3", "5/7,3/7"] {
            let t = Trellis::from_octal(octal).unwrap();
            let (f1, f2) = transfer(&t, 1.0, 1.0).unwrap();
            assert_eq!((f1, f2), (1.0, 1.0), "{octal}");
        }
    }

    #[test]
    fn chain_corners() {
        let t = Trellis::from_octal("5/7").unwrap();
        let pinned = forward_chain(&t, 0.0, 0.0).unwrap();
        assert!((pinned.singleton_mass() - 1.0).abs() < 1e-12);
        let blind = forward_chain(&t, 1.0, 1.0).unwrap();
        assert!((blind.prob_of(0b1111) - 1.0).abs() < 1e-12);
        let back = backward_chain(&t, 0.37, 0.61).unwrap();
        let rev = forward_chain(&t.reversed().unwrap(), 0.37, 0.61).unwrap();
        assert_eq!(back.sets(), rev.sets());
        for (a, b) in back.probs().iter().zip(rev.probs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn distributions_are_normalized() {
        for octal in ["5/7", "1/3", "5/7,3/7"] {
            let t = Trellis::from_octal(octal).unwrap();
            let tr = TrellisTransfer::new(&t).unwrap();
            let priors = vec![0.4; tr.positions()];
            for d in [
                tr.forward_distribution(&priors).unwrap(),
                tr.backward_distribution(&priors).unwrap(),
            ] {
                let total: f64 = d.probs().iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monotone_in_each_argument() {
        let tr = tt("5/7");
        let grid: Vec<f64> = (0..=6).map(|i| i as f64 / 6.0).collect();
        for &a in &grid {
            let mut prev = (0.0, 0.0);
            for &b in &grid {
                let out = tr.eval(&[a, b]).unwrap();
                assert!(out[0] >= prev.0 - 1e-12 && out[1] >= prev.1 - 1e-12);
                prev = (out[0], out[1]);
            }
            let mut prev = (0.0, 0.0);
            for &b in &grid {
                let out = tr.eval(&[b, a]).unwrap();
                assert!(out[0] >= prev.0 - 1e-12 && out[1] >= prev.1 - 1e-12);
                prev = (out[0], out[1]);
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_at_a_point() {
        let t = Trellis::from_octal("5/7").unwrap();
        let (f1, f2) = transfer(&t, 0.6, 0.6).unwrap();
        let mc = monte_carlo_transfer(&t, 0.6, 0.6, 100_000, 31).unwrap();
        assert!((mc.f1 - f1).abs() <= 3.0 * mc.stderr1, "{} vs {f1}", mc.f1);
        assert!((mc.f2 - f2).abs() <= 3.0 * mc.stderr2, "{} vs {f2}", mc.f2);
        assert!(mc.stderr1 > 0.0 && mc.stderr1 < 0.01);
    }

    #[test]
    fn monte_carlo_is_exact_at_zero_noise() {
        let t = Trellis::from_octal("1/3").unwrap();
        let mc = monte_carlo_transfer(&t, 0.0, 0.0, 10_000, 9).unwrap();
        assert_eq!((mc.f1, mc.f2), (0.0, 0.0));
        assert_eq!((mc.stderr1, mc.stderr2), (0.0, 0.0));
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let t = Trellis::from_octal("5/7").unwrap();
        let a = monte_carlo_transfer(&t, 0.4, 0.7, 20_000, 5).unwrap();
        let b = monte_carlo_transfer(&t, 0.4, 0.7, 20_000, 5).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_transfer(&t, 0.4, 0.7, 20_000, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_arguments() {
        let t = Trellis::from_octal("5/7").unwrap();
        let tr = TrellisTransfer::new(&t).unwrap();
        assert!(tr.eval(&[0.5]).is_err());
        assert!(tr.eval(&[0.5, 1.5]).is_err());
        assert!(monte_carlo_transfer(&t, 0.5, 0.5, 100, 1).is_err());
    }
}
