//! Finite-length realization of compact graphs: concrete interleavers and
//! puncturing, encoding with feedback resolution, and erasure-domain BP
//! decoding.
//!
//! A [`ConcreteCode`] pins every random choice of the ensemble (one seed
//! covers interleavers and puncturing). Ports are laid out as the
//! concatenation of their edges, an edge with `sockets_per_bit = s`
//! contributing `s` consecutive full copies of its variable stream. An
//! input-port permutation gathers: trellis section `t` reads layout slot
//! `perm.src(t)`. A parity-port permutation gathers the other way: layout
//! slot `s` receives the parity bit of section `perm.src(s)`. Blocks
//! restart from state zero and run unterminated, so the effective rate
//! equals the design rate up to puncturing round-off.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::graph::{CompactGraph, VarRole};
use crate::rng;
use crate::trellis::Trellis;

struct ConcreteFactor {
    trellis: Trellis,
    sections: usize,
    /// Cumulative block boundaries; the last entry equals `sections`.
    bounds: Vec<usize>,
    /// Per input port: global bit read by each section.
    reads: Vec<Vec<u32>>,
    /// Global bit written by each section's parity output.
    writes: Vec<u32>,
    /// Global socket id of section 0, per port (inputs then parity).
    socket_base: Vec<usize>,
}

enum Stage {
    /// Causally encodable block: every bit it reads is already settled.
    Block { factor: usize, block: usize },
    /// Mutually dependent blocks; the fed-back parity bits `z` satisfy
    /// z = A z + c where c is what the blocks produce with z forced to
    /// zero, so one guess pass plus a precomputed inverse settles them.
    Feedback {
        members: Vec<(usize, usize)>,
        z_bits: Vec<u32>,
        /// Global bit -> position in `z_bits`, or `u32::MAX`.
        z_index: Vec<u32>,
        inv: BitMatrix,
    },
}

/// A compact graph instantiated at block length `N` with concrete,
/// seeded interleavers and puncturing masks.
pub struct ConcreteCode {
    n: usize,
    seed: u64,
    info_len: usize,
    total_bits: usize,
    var_base: Vec<usize>,
    var_len: Vec<usize>,
    var_role: Vec<VarRole>,
    /// Transmitted mask per global bit (exact-count puncturing).
    keep: Vec<bool>,
    transmitted_len: usize,
    factors: Vec<ConcreteFactor>,
    plan: Vec<Stage>,
    /// Per global bit: sockets touching it, CSR layout.
    socket_starts: Vec<u32>,
    socket_items: Vec<u32>,
    total_sockets: usize,
    design_rate: f64,
    planned: bool,
}

/// Received word over the transmitted bits: `Some` = known, `None` = erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasureWord {
    pub bits: Vec<Option<bool>>,
}

/// Decoder output: per information bit `Some(value)` or still erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub message: Vec<Option<bool>>,
    /// Message-passing sweeps that changed at least one message.
    pub iterations: u64,
}

const FEEDBACK_RESAMPLES: u64 = 16;

/// Draws the concrete interleavers and puncturing for `graph` at block
/// length `n`. Seeds are consumed per purpose, so equal seeds give equal
/// codes. Graphs whose feedback system is singular under the drawn
/// interleavers are redrawn up to 16 times before giving up.
pub fn instantiate(graph: &CompactGraph, n: usize, seed: u64) -> Result<ConcreteCode> {
    check_args(graph, n)?;
    let mut last = Err(Error::SingularFeedback { seed });
    for attempt in 0..FEEDBACK_RESAMPLES {
        match instantiate_attempt(graph, n, seed, attempt, true) {
            Err(Error::SingularFeedback { .. }) => {
                last = Err(Error::SingularFeedback { seed });
            }
            other => return other,
        }
    }
    last
}

/// As [`instantiate`], but skips the encoder planning (block ordering and
/// feedback inversion). The result decodes but cannot encode; this is for
/// all-zero-codeword studies, where erasure decoding of a linear code is
/// distribution-identical to decoding random codewords and the feedback
/// inversion of a large acausal wiring would dominate the runtime.
pub fn instantiate_for_decoding(
    graph: &CompactGraph,
    n: usize,
    seed: u64,
) -> Result<ConcreteCode> {
    check_args(graph, n)?;
    instantiate_attempt(graph, n, seed, 0, false)
}

fn check_args(graph: &CompactGraph, n: usize) -> Result<()> {
    graph.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput(alloc::string::String::from(
            "block length must be at least 1",
        )));
    }
    Ok(())
}

fn instantiate_attempt(
    graph: &CompactGraph,
    n: usize,
    seed: u64,
    attempt: u64,
    plan_encoder: bool,
) -> Result<ConcreteCode> {
    let mut var_base = Vec::with_capacity(graph.vars.len());
    let mut var_len = Vec::with_capacity(graph.vars.len());
    let mut var_role = Vec::with_capacity(graph.vars.len());
    let mut total_bits = 0usize;
    let mut info_len = 0usize;
    for v in &graph.vars {
        var_base.push(total_bits);
        let len = v.multiplier as usize * n;
        var_len.push(len);
        var_role.push(v.role);
        total_bits += len;
        if v.role == VarRole::Information {
            info_len += len;
        }
    }

    // Exact-count puncturing: round(rho * len) survivors per stream.
    let mut keep = vec![false; total_bits];
    let mut transmitted_len = 0usize;
    for (v, node) in graph.vars.iter().enumerate() {
        let len = var_len[v];
        let count = libm::round(node.rho * len as f64) as usize;
        let count = count.min(len);
        transmitted_len += count;
        let base = var_base[v];
        if count == len {
            keep[base..base + len].fill(true);
        } else if count > 0 {
            let mut idx: Vec<u32> = (0..len as u32).collect();
            let mut rg = rng::stream(seed, "puncture", (attempt << 32) | v as u64);
            for i in 0..count {
                let j = i + rng::below(&mut rg, len - i);
                idx.swap(i, j);
            }
            for &i in &idx[..count] {
                keep[base + i as usize] = true;
            }
        }
    }

    let mut factors = Vec::with_capacity(graph.factors.len());
    let mut socket_bit: Vec<u32> = Vec::new();
    let mut perm_counter = 0u64;
    for f in &graph.factors {
        if f.trellis.output_arity() != 1 {
            return Err(Error::InvalidInput(format!(
                "trellis with {} parity bits per section is not wireable",
                f.trellis.output_arity()
            )));
        }
        let sections = f.sections as usize * n;
        let arity = f.trellis.input_arity();
        if f.ports.len() != arity + 1 {
            return Err(Error::InvalidInput(format!(
                "trellis input arity {arity} needs {} ports, got {}",
                arity + 1,
                f.ports.len()
            )));
        }
        // Layout slot -> global bit, per port.
        let layout = |port: &crate::graph::PortWiring| -> Vec<u32> {
            let mut slots = Vec::with_capacity(sections);
            for e in &port.edges {
                let base = var_base[e.var] as u32;
                let len = var_len[e.var] as u32;
                for _copy in 0..e.sockets_per_bit {
                    slots.extend(base..base + len);
                }
            }
            slots
        };
        let mut reads = Vec::with_capacity(arity);
        let mut socket_base = Vec::with_capacity(arity + 1);
        for port in &f.ports[..arity] {
            let slots = layout(port);
            let mut rg = rng::stream(seed, "perm", (attempt << 32) | perm_counter);
            perm_counter += 1;
            let perm = port.perm.resolve(sections, &mut rg)?;
            let gathered: Vec<u32> = (0..sections).map(|t| slots[perm.src(t)]).collect();
            socket_base.push(socket_bit.len());
            socket_bit.extend_from_slice(&gathered);
            reads.push(gathered);
        }
        let parity = &f.ports[arity];
        let slots = layout(parity);
        let mut rg = rng::stream(seed, "perm", (attempt << 32) | perm_counter);
        perm_counter += 1;
        let perm = parity.perm.resolve(sections, &mut rg)?;
        let mut writes = vec![0u32; sections];
        for s in 0..sections {
            writes[perm.src(s)] = slots[s];
        }
        socket_base.push(socket_bit.len());
        socket_bit.extend_from_slice(&writes);

        let mut bounds = Vec::with_capacity(f.blocks.len());
        let mut acc = 0usize;
        for &b in &f.blocks {
            acc += b as usize * n;
            bounds.push(acc);
        }
        factors.push(ConcreteFactor {
            trellis: f.trellis.clone(),
            sections,
            bounds,
            reads,
            writes,
            socket_base,
        });
    }
    let total_sockets = socket_bit.len();

    // CSR of sockets per global bit.
    let mut counts = vec![0u32; total_bits + 1];
    for &b in &socket_bit {
        counts[b as usize + 1] += 1;
    }
    for i in 0..total_bits {
        counts[i + 1] += counts[i];
    }
    let socket_starts = counts.clone();
    let mut fill = counts;
    let mut socket_items = vec![0u32; total_sockets];
    for (s, &b) in socket_bit.iter().enumerate() {
        let slot = fill[b as usize];
        socket_items[slot as usize] = s as u32;
        fill[b as usize] += 1;
    }

    let plan = if plan_encoder {
        build_plan(&factors, &var_base, &var_role, total_bits, seed)?
    } else {
        Vec::new()
    };

    Ok(ConcreteCode {
        n,
        seed,
        info_len,
        total_bits,
        var_base,
        var_len,
        var_role,
        keep,
        transmitted_len,
        factors,
        plan,
        socket_starts,
        socket_items,
        total_sockets,
        design_rate: graph.design_rate(),
        planned: plan_encoder,
    })
}

/// Orders blocks causally, lumping mutually dependent ones into feedback
/// stages solved by linear inversion.
fn build_plan(
    factors: &[ConcreteFactor],
    var_base: &[usize],
    var_role: &[VarRole],
    total_bits: usize,
    seed: u64,
) -> Result<Vec<Stage>> {
    let _ = var_base;
    // Producer block of every parity bit.
    let mut producer = vec![usize::MAX; total_bits];
    let mut nodes = Vec::new();
    for (fi, f) in factors.iter().enumerate() {
        let mut start = 0usize;
        for (bi, &end) in f.bounds.iter().enumerate() {
            let node = nodes.len();
            nodes.push((fi, bi));
            for t in start..end {
                producer[f.writes[t] as usize] = node;
            }
            start = end;
        }
    }
    // deps[a] = set of nodes whose parity a reads.
    let m = nodes.len();
    let mut deps = vec![vec![false; m]; m];
    for (node, &(fi, bi)) in nodes.iter().enumerate() {
        let f = &factors[fi];
        let start = if bi == 0 { 0 } else { f.bounds[bi - 1] };
        let end = f.bounds[bi];
        for port in &f.reads {
            for t in start..end {
                let bit = port[t] as usize;
                let p = producer[bit];
                if p != usize::MAX {
                    deps[node][p] = true;
                }
            }
        }
        // Information inputs are always available.
        let _ = var_role;
    }

    // Reachability closure to find nodes on cycles.
    let mut reach = deps.clone();
    for k in 0..m {
        for i in 0..m {
            if reach[i][k] {
                for j in 0..m {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }

    let mut plan = Vec::new();
    let mut done = vec![false; m];
    let mut remaining = m;
    while remaining > 0 {
        let mut progressed = false;
        for node in 0..m {
            if done[node] {
                continue;
            }
            if (0..m).all(|d| !deps[node][d] || done[d]) {
                let (factor, block) = nodes[node];
                plan.push(Stage::Block { factor, block });
                done[node] = true;
                remaining -= 1;
                progressed = true;
            }
        }
        if progressed {
            continue;
        }
        // Stuck: collect every undone node that lies on a cycle.
        let members_idx: Vec<usize> = (0..m).filter(|&i| !done[i] && reach[i][i]).collect();
        if members_idx.is_empty() {
            return Err(Error::Inconsistency(alloc::string::String::from(
                "block dependency analysis stalled without a cycle",
            )));
        }
        let stage = build_feedback_stage(factors, &nodes, &members_idx, &producer, seed)?;
        plan.push(stage);
        for &i in &members_idx {
            done[i] = true;
            remaining -= 1;
        }
    }
    Ok(plan)
}

fn block_range(f: &ConcreteFactor, bi: usize) -> (usize, usize) {
    let start = if bi == 0 { 0 } else { f.bounds[bi - 1] };
    (start, f.bounds[bi])
}

fn build_feedback_stage(
    factors: &[ConcreteFactor],
    nodes: &[(usize, usize)],
    members_idx: &[usize],
    producer: &[usize],
    seed: u64,
) -> Result<Stage> {
    let members: Vec<(usize, usize)> = members_idx.iter().map(|&i| nodes[i]).collect();
    let in_stage = |node: usize| members_idx.contains(&node);

    // Fed-back bits: produced by a member and read by a member.
    let mut z_index = vec![u32::MAX; producer.len()];
    let mut z_bits = Vec::new();
    for &(fi, bi) in &members {
        let f = &factors[fi];
        let (start, end) = block_range(f, bi);
        for port in &f.reads {
            for t in start..end {
                let bit = port[t] as usize;
                let p = producer[bit];
                if p != usize::MAX && in_stage(p) && z_index[bit] == u32::MAX {
                    z_index[bit] = z_bits.len() as u32;
                    z_bits.push(bit as u32);
                }
            }
        }
    }
    let z = z_bits.len();

    // Column i of A: what the members produce at the z positions when the
    // fed-back bits are the unit vector e_i and every other input is zero.
    let mut system = BitMatrix::identity(z);
    let mut streams = vec![false; producer.len()];
    let mut assume = vec![false; z];
    let mut produced = vec![false; z];
    for col in 0..z {
        assume.fill(false);
        assume[col] = true;
        produced.fill(false);
        for &(fi, bi) in &members {
            run_block(
                &factors[fi],
                bi,
                &mut streams,
                Some((&z_index, &assume, &mut produced)),
            );
        }
        for (row, &p) in produced.iter().enumerate() {
            if p {
                system.toggle(row, col);
            }
        }
        // run_block with overrides never writes z bits to the streams, and
        // non-z writes are zeroed for the next column by rerunning with an
        // all-zero basis only if they could alias; they cannot, each parity
        // bit has one producer, so clear them explicitly.
        for &(fi, bi) in &members {
            let f = &factors[fi];
            let (start, end) = block_range(f, bi);
            for t in start..end {
                streams[f.writes[t] as usize] = false;
            }
        }
    }
    let inv = system
        .inverse()
        .ok_or(Error::SingularFeedback { seed })?;
    Ok(Stage::Feedback {
        members,
        z_bits,
        z_index,
        inv,
    })
}

/// Runs one block from state zero. With `overrides = Some((index, assume,
/// produced))`, reads of fed-back bits come from `assume` and their writes
/// go to `produced` instead of the streams.
fn run_block(
    f: &ConcreteFactor,
    block: usize,
    streams: &mut [bool],
    mut overrides: Option<(&[u32], &[bool], &mut [bool])>,
) {
    let (start, end) = block_range(f, block);
    let mut state = 0usize;
    for t in start..end {
        let mut sym = 0usize;
        for (p, port) in f.reads.iter().enumerate() {
            let bit = port[t] as usize;
            let val = match &overrides {
                Some((index, assume, _)) if index[bit] != u32::MAX => {
                    assume[index[bit] as usize]
                }
                _ => streams[bit],
            };
            sym |= usize::from(val) << p;
        }
        let (next, out) = f.trellis.step(state, sym);
        state = next;
        let w = f.writes[t] as usize;
        match &mut overrides {
            Some((index, _, produced)) if index[w] != u32::MAX => {
                produced[index[w] as usize] = out != 0;
            }
            _ => streams[w] = out != 0,
        }
    }
}

impl ConcreteCode {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Information bits per codeword.
    pub fn info_len(&self) -> usize {
        self.info_len
    }

    /// Bits on the channel per codeword, after puncturing.
    pub fn transmitted_len(&self) -> usize {
        self.transmitted_len
    }

    /// Asymptotic rate of the underlying graph.
    pub fn design_rate(&self) -> f64 {
        self.design_rate
    }

    /// info_len / transmitted_len; differs from the design rate only by
    /// puncturing round-off since blocks run unterminated.
    pub fn effective_rate(&self) -> f64 {
        self.info_len as f64 / self.transmitted_len as f64
    }

    fn scatter_message(&self, u: &[bool], streams: &mut [bool]) {
        let mut off = 0usize;
        for v in 0..self.var_len.len() {
            if self.var_role[v] == VarRole::Information {
                let base = self.var_base[v];
                let len = self.var_len[v];
                streams[base..base + len].copy_from_slice(&u[off..off + len]);
                off += len;
            }
        }
    }

    fn gather_transmitted(&self, streams: &[bool]) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.transmitted_len);
        for (bit, &k) in self.keep.iter().enumerate() {
            if k {
                out.push(streams[bit]);
            }
        }
        out
    }
}

/// Encodes a message through the concrete wiring and returns the
/// transmitted bits (variable order, puncturing applied).
pub fn encode_code(code: &ConcreteCode, u: &[bool]) -> Result<Vec<bool>> {
    if !code.planned {
        return Err(Error::InvalidInput(alloc::string::String::from(
            "code was instantiated for decoding only",
        )));
    }
    if u.len() != code.info_len {
        return Err(Error::LengthMismatch {
            expected: code.info_len,
            got: u.len(),
        });
    }
    let mut streams = vec![false; code.total_bits];
    code.scatter_message(u, &mut streams);
    for stage in &code.plan {
        match stage {
            Stage::Block { factor, block } => {
                run_block(&code.factors[*factor], *block, &mut streams, None);
            }
            Stage::Feedback {
                members,
                z_bits,
                z_index,
                inv,
            } => {
                // Guess pass with the fed-back bits at zero gives the
                // affine part c; then z = inv * c.
                let mut c = vec![false; z_bits.len()];
                let assume = vec![false; z_bits.len()];
                for &(fi, bi) in members {
                    run_block(
                        &code.factors[fi],
                        bi,
                        &mut streams,
                        Some((z_index, &assume, &mut c)),
                    );
                }
                let z = inv.mul_vec(&c);
                for (&bit, &val) in z_bits.iter().zip(z.iter()) {
                    streams[bit as usize] = val;
                }
                for &(fi, bi) in members {
                    run_block(&code.factors[fi], bi, &mut streams, None);
                }
                for (&bit, &val) in z_bits.iter().zip(z.iter()) {
                    if streams[bit as usize] != val {
                        return Err(Error::Inconsistency(alloc::string::String::from(
                            "feedback solution does not re-encode to itself",
                        )));
                    }
                }
            }
        }
    }
    Ok(code.gather_transmitted(&streams))
}

fn merge(
    acc: &mut Option<bool>,
    msg: Option<bool>,
) -> core::result::Result<(), ()> {
    match (acc.as_ref(), msg) {
        (_, None) => Ok(()),
        (None, Some(v)) => {
            *acc = Some(v);
            Ok(())
        }
        (Some(&a), Some(v)) if a == v => Ok(()),
        _ => Err(()),
    }
}

/// Iterative erasure decoding: set-valued forward/backward sweeps on each
/// trellis block exchange known bits with the variable streams until
/// nothing changes. Over the BEC a declared bit is always correct; any
/// contradiction is a wiring bug and comes back as
/// [`Error::Inconsistency`].
pub fn bp_decode(code: &ConcreteCode, rx: &ErasureWord, max_iter: u64) -> Result<Decoded> {
    bp_decode_traced(code, rx, max_iter, &mut |_, _| {})
}

/// As [`bp_decode`]; after every sweep, `sink` receives the fraction of
/// still-erased factor-to-variable messages on input sockets and on
/// parity sockets, the finite-length analogue of a DE trajectory.
pub fn bp_decode_traced(
    code: &ConcreteCode,
    rx: &ErasureWord,
    max_iter: u64,
    sink: &mut dyn FnMut(f64, f64),
) -> Result<Decoded> {
    if rx.bits.len() != code.transmitted_len {
        return Err(Error::LengthMismatch {
            expected: code.transmitted_len,
            got: rx.bits.len(),
        });
    }
    let mut channel: Vec<Option<bool>> = vec![None; code.total_bits];
    let mut k = 0usize;
    for (bit, &keep) in code.keep.iter().enumerate() {
        if keep {
            channel[bit] = rx.bits[k];
            k += 1;
        }
    }

    let mut f2v: Vec<Option<bool>> = vec![None; code.total_sockets];
    let mut v2f: Vec<Option<bool>> = vec![None; code.total_sockets];
    let max_sections = code.factors.iter().map(|f| f.sections).max().unwrap_or(0);
    let state_count = code
        .factors
        .iter()
        .map(|f| f.trellis.state_count())
        .max()
        .unwrap_or(1);
    if state_count > 16 {
        return Err(Error::InvalidInput(format!(
            "decoder state sets hold at most 16 states, trellis has {state_count}"
        )));
    }
    let mut fwd = vec![0u16; max_sections + 1];
    let mut bwd = vec![0u16; max_sections + 1];

    let mut iterations = 0u64;
    while iterations < max_iter {
        let mut changed = false;

        // Variable pass: per-socket extrinsics from channel plus the
        // other sockets of the same bit.
        for bit in 0..code.total_bits {
            let lo = code.socket_starts[bit] as usize;
            let hi = code.socket_starts[bit + 1] as usize;
            let mut known: Option<bool> = channel[bit];
            let mut count = usize::from(known.is_some());
            for &s in &code.socket_items[lo..hi] {
                let msg = f2v[s as usize];
                if merge(&mut known, msg).is_err() {
                    return Err(Error::Inconsistency(format!(
                        "conflicting values for stream bit {bit}"
                    )));
                }
                count += usize::from(msg.is_some());
            }
            for &s in &code.socket_items[lo..hi] {
                let s = s as usize;
                let others = count - usize::from(f2v[s].is_some());
                let out = if others > 0 { known } else { None };
                if v2f[s] != out {
                    v2f[s] = out;
                    changed = true;
                }
            }
        }

        // Factor pass: per block, set-valued BCJR over the state masks.
        for f in &code.factors {
            let arity = f.reads.len();
            let states = f.trellis.state_count();
            let all_mask: u16 = if states >= 16 { !0 } else { (1u16 << states) - 1 };
            let mut start = 0usize;
            for &end in &f.bounds {
                fwd[start] = 1; // state zero
                for t in start..end {
                    let mut next_mask = 0u16;
                    let par = v2f[f.socket_base[arity] + t];
                    for s in 0..states {
                        if fwd[t] & (1 << s) == 0 {
                            continue;
                        }
                        'sym: for sym in 0..(1usize << arity) {
                            for p in 0..arity {
                                if let Some(v) = v2f[f.socket_base[p] + t] {
                                    if (sym >> p) & 1 != usize::from(v) {
                                        continue 'sym;
                                    }
                                }
                            }
                            let (ns, out) = f.trellis.step(s, sym);
                            if let Some(v) = par {
                                if out != usize::from(v) {
                                    continue 'sym;
                                }
                            }
                            next_mask |= 1 << ns;
                        }
                    }
                    fwd[t + 1] = next_mask;
                }
                bwd[end] = all_mask;
                for t in (start..end).rev() {
                    let mut mask = 0u16;
                    let par = v2f[f.socket_base[arity] + t];
                    for s in 0..states {
                        'sym: for sym in 0..(1usize << arity) {
                            for p in 0..arity {
                                if let Some(v) = v2f[f.socket_base[p] + t] {
                                    if (sym >> p) & 1 != usize::from(v) {
                                        continue 'sym;
                                    }
                                }
                            }
                            let (ns, out) = f.trellis.step(s, sym);
                            if let Some(v) = par {
                                if out != usize::from(v) {
                                    continue 'sym;
                                }
                            }
                            if bwd[t + 1] & (1 << ns) != 0 {
                                mask |= 1 << s;
                                break 'sym;
                            }
                        }
                    }
                    bwd[t] = mask;
                }
                // Extrinsics: drop the target port's own message.
                for t in start..end {
                    let par = v2f[f.socket_base[arity] + t];
                    for target in 0..=arity {
                        let mut seen = [false; 2];
                        for s in 0..states {
                            if fwd[t] & (1 << s) == 0 {
                                continue;
                            }
                            'sym2: for sym in 0..(1usize << arity) {
                                for p in 0..arity {
                                    if p == target {
                                        continue;
                                    }
                                    if let Some(v) = v2f[f.socket_base[p] + t] {
                                        if (sym >> p) & 1 != usize::from(v) {
                                            continue 'sym2;
                                        }
                                    }
                                }
                                let (ns, out) = f.trellis.step(s, sym);
                                if target != arity {
                                    if let Some(v) = par {
                                        if out != usize::from(v) {
                                            continue 'sym2;
                                        }
                                    }
                                }
                                if bwd[t + 1] & (1 << ns) == 0 {
                                    continue 'sym2;
                                }
                                let b = if target == arity {
                                    out
                                } else {
                                    (sym >> target) & 1
                                };
                                seen[b] = true;
                            }
                        }
                        let ext = match (seen[0], seen[1]) {
                            (true, false) => Some(false),
                            (false, true) => Some(true),
                            (true, true) => None,
                            (false, false) => {
                                return Err(Error::Inconsistency(format!(
                                    "no consistent trellis transition at section {t}"
                                )))
                            }
                        };
                        let sock = f.socket_base[target] + t;
                        if f2v[sock] != ext {
                            f2v[sock] = ext;
                            changed = true;
                        }
                    }
                }
                start = end;
            }
        }

        if !changed {
            break;
        }
        iterations += 1;

        let mut input_erased = 0usize;
        let mut input_total = 0usize;
        let mut parity_erased = 0usize;
        let mut parity_total = 0usize;
        for f in &code.factors {
            let arity = f.reads.len();
            for p in 0..arity {
                let base = f.socket_base[p];
                input_total += f.sections;
                input_erased += f2v[base..base + f.sections]
                    .iter()
                    .filter(|m| m.is_none())
                    .count();
            }
            let base = f.socket_base[arity];
            parity_total += f.sections;
            parity_erased += f2v[base..base + f.sections]
                .iter()
                .filter(|m| m.is_none())
                .count();
        }
        sink(
            input_erased as f64 / input_total.max(1) as f64,
            parity_erased as f64 / parity_total.max(1) as f64,
        );
    }

    let mut message = Vec::with_capacity(code.info_len);
    for v in 0..code.var_len.len() {
        if code.var_role[v] != VarRole::Information {
            continue;
        }
        let base = code.var_base[v];
        for bit in base..base + code.var_len[v] {
            let lo = code.socket_starts[bit] as usize;
            let hi = code.socket_starts[bit + 1] as usize;
            let mut known = channel[bit];
            for &s in &code.socket_items[lo..hi] {
                if merge(&mut known, f2v[s as usize]).is_err() {
                    return Err(Error::Inconsistency(format!(
                        "conflicting values for stream bit {bit}"
                    )));
                }
            }
            message.push(known);
        }
    }
    Ok(Decoded {
        message,
        iterations,
    })
}
