//! Density evolution over the BEC.
//!
//! Messages are erasure probabilities. One iteration sends variable-node
//! extrinsics through the exact trellis transfer of [`crate::transfer`]
//! and back; `x1` is the trellis-to-variable erasure probability on the
//! input side, `x2` on the parity side. For the self-concatenated family
//! the two-message recursion [`de_step`] suffices; arbitrary graphs go
//! through [`GraphDe`], which runs the same flooding schedule with one
//! message per graph edge. Both paths share every arithmetic detail, so
//! their trajectories on the same ensemble agree bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{CompactGraph, UnifiedParams, VarRole};
use crate::transfer::TrellisTransfer;

/// Iteration cap for one DE run.
pub const MAX_ITER: u64 = 100_000;
/// Fixed-point detection: stop when |dx1| + |dx2| drops below this.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// A run counts as converged when the a-posteriori information-bit
/// erasure probability falls below this.
pub const P_TARGET: f64 = 1e-10;
/// Default bisection bracket width for thresholds.
pub const THRESHOLD_TOL: f64 = 1e-5;

fn ipow(x: f64, n: u32) -> f64 {
    let mut r = 1.0;
    for _ in 0..n {
        r *= x;
    }
    r
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidInput(alloc::format!(
            "channel parameter {eps} outside [0,1]"
        )));
    }
    Ok(())
}

/// Erasure channel as seen through puncturing: a bit surviving with
/// probability `rho` is erased unless transmitted and received.
fn channel_term(rho: f64, eps: f64) -> f64 {
    rho * eps + (1.0 - rho)
}

/// One tracked DE iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeState {
    /// Trellis extrinsic erasure probability toward input-side bits.
    pub x1: f64,
    /// Same toward parity-side bits.
    pub x2: f64,
    /// A-posteriori erasure probability of an information bit:
    /// `eps * x1^q`.
    pub p_a: f64,
    pub iteration: u64,
}

impl DeState {
    pub fn start(params: &UnifiedParams, eps: f64) -> Self {
        DeState {
            x1: 1.0,
            x2: 1.0,
            p_a: eps * ipow(1.0, params.q()),
            iteration: 0,
        }
    }
}

/// One flooding iteration of the two-message recursion.
///
/// The trellis input is `q` information copies mixed with the fed-back
/// parity part, so the input-side prior averages the two with weights
/// `q` and `l2`; the parity side splits into a transmitted-only part
/// (weight `l1`, channel term only) and the fed-back part (weight `l2`,
/// channel times input-side extrinsic).
pub fn de_step(
    params: &UnifiedParams,
    eps: f64,
    state: &DeState,
    transfer: &TrellisTransfer,
) -> Result<DeState> {
    check_eps(eps)?;
    if transfer.positions() != 2 {
        return Err(Error::InvalidInput(alloc::format!(
            "two-message recursion needs a single-input trellis, transfer has {} positions",
            transfer.positions()
        )));
    }
    let (q, l1, l2) = (params.q(), params.l1(), params.l2());
    let l = params.l() as f64;
    let c1 = channel_term(params.rho1(), eps);
    let c2 = channel_term(params.rho2().unwrap_or(0.0), eps);
    // Term order matches the edge order of the unified graph so that
    // GraphDe reproduces these sums exactly.
    let y1 = (q as f64 * (eps * ipow(state.x1, q - 1)) + l2 as f64 * (c2 * state.x2)) / l;
    let y2 = (l1 as f64 * c1 + l2 as f64 * (c2 * state.x1)) / l;
    let out = transfer.eval(&[y1, y2])?;
    let (x1, x2) = (out[0], out[1]);
    Ok(DeState {
        x1,
        x2,
        p_a: eps * ipow(x1, q),
        iteration: state.iteration + 1,
    })
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeRun {
    pub converged: bool,
    pub state: DeState,
    pub trace: Vec<DeState>,
}

/// Iterate from the all-erased start until the movement |dx1| + |dx2|
/// falls below `tol` or `max_iter` is hit. Convergence means the final
/// `p_a` is below [`P_TARGET`]; staying above it is a legal outcome, not
/// an error. The trace holds every iterate including the start.
pub fn de_run(
    params: &UnifiedParams,
    eps: f64,
    transfer: &TrellisTransfer,
    max_iter: u64,
    tol: f64,
) -> Result<DeRun> {
    if tol <= 0.0 {
        return Err(Error::InvalidInput(alloc::format!(
            "fixed-point tolerance must be positive, got {tol}"
        )));
    }
    let mut state = DeState::start(params, eps);
    let mut trace = vec![state];
    while state.iteration < max_iter {
        let next = de_step(params, eps, &state, transfer)?;
        let moved = (next.x1 - state.x1).abs() + (next.x2 - state.x2).abs();
        state = next;
        trace.push(state);
        if moved < tol {
            break;
        }
    }
    Ok(DeRun {
        converged: state.p_a < P_TARGET,
        state,
        trace,
    })
}

/// Convergence decision only, with an early exit once `p_a` is beaten
/// (sound: the iterates decrease monotonically from the all-ones start).
fn converges(
    params: &UnifiedParams,
    eps: f64,
    transfer: &TrellisTransfer,
) -> Result<(bool, u64)> {
    let mut state = DeState::start(params, eps);
    while state.iteration < MAX_ITER {
        let next = de_step(params, eps, &state, transfer)?;
        let moved = (next.x1 - state.x1).abs() + (next.x2 - state.x2).abs();
        state = next;
        if state.p_a < P_TARGET {
            return Ok((true, state.iteration));
        }
        if moved < FIXED_POINT_TOL {
            break;
        }
    }
    Ok((state.p_a < P_TARGET, state.iteration))
}

/// Flags for parameter corners where bisection has nothing to split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Degeneracy {
    None,
    /// DE converges even at eps = 1; threshold reported as 1.
    ConvergesEverywhere,
    /// DE fails even at eps = 0; threshold reported as 0.
    ConvergesNowhere,
}

#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdResult {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    /// Total DE iterations spent across all probes.
    pub de_iterations: u64,
    pub degeneracy: Degeneracy,
}

/// Bisection of a monotone convergence predicate on [0, 1].
fn bisect_threshold(
    mut probe: impl FnMut(f64) -> Result<(bool, u64)>,
    tol: f64,
) -> Result<ThresholdResult> {
    if tol < THRESHOLD_TOL {
        return Err(Error::InvalidInput(alloc::format!(
            "bisection tolerance {tol} finer than supported {THRESHOLD_TOL}"
        )));
    }
    let mut spent = 0u64;
    let (top, it) = probe(1.0)?;
    spent += it;
    if top {
        return Ok(ThresholdResult {
            value: 1.0,
            lo: 1.0,
            hi: 1.0,
            tol,
            de_iterations: spent,
            degeneracy: Degeneracy::ConvergesEverywhere,
        });
    }
    let (bottom, it) = probe(0.0)?;
    spent += it;
    if !bottom {
        return Ok(ThresholdResult {
            value: 0.0,
            lo: 0.0,
            hi: 0.0,
            tol,
            de_iterations: spent,
            degeneracy: Degeneracy::ConvergesNowhere,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (ok, it) = probe(mid)?;
        spent += it;
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        value: 0.5 * (lo + hi),
        lo,
        hi,
        tol,
        de_iterations: spent,
        degeneracy: Degeneracy::None,
    })
}

/// Largest channel parameter (to bracket width `tol`, at least
/// [`THRESHOLD_TOL`]) at which DE still drives the information-bit
/// erasure probability to zero.
pub fn bp_threshold(
    params: &UnifiedParams,
    transfer: &TrellisTransfer,
    tol: f64,
) -> Result<ThresholdResult> {
    bisect_threshold(|eps| converges(params, eps, transfer), tol)
}

/// One point of the extrinsic erasure curve at the DE fixed point.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExitPoint {
    pub eps: f64,
    pub x1: f64,
    pub x2: f64,
    /// Transmitted-bit average extrinsic erasure probability, normalized
    /// so h(1) = 1.
    pub h: f64,
}

/// Extrinsic erasure probability of an average transmitted bit at the
/// fixed point (x1, x2): information bits see their q trellis copies
/// (x1^q), transmitted-only parity sees x2, fed-back parity sees both of
/// its attachments (x1 x2); weights are the transmitted length fractions.
fn exit_fraction(params: &UnifiedParams, x1: f64, x2: f64) -> f64 {
    let w1 = params.rho1() * params.l1() as f64;
    let w2 = params.rho2().unwrap_or(0.0) * params.l2() as f64;
    (ipow(x1, params.q()) + w1 * x2 + w2 * (x1 * x2)) / (1.0 + w1 + w2)
}

/// Fixed point reached from `start`, plus iterations spent.
fn settle(
    params: &UnifiedParams,
    eps: f64,
    transfer: &TrellisTransfer,
    start: (f64, f64),
) -> Result<((f64, f64), u64)> {
    let mut state = DeState {
        x1: start.0,
        x2: start.1,
        p_a: eps * ipow(start.0, params.q()),
        iteration: 0,
    };
    while state.iteration < MAX_ITER {
        let next = de_step(params, eps, &state, transfer)?;
        let moved = (next.x1 - state.x1).abs() + (next.x2 - state.x2).abs();
        state = next;
        if moved < FIXED_POINT_TOL {
            break;
        }
    }
    Ok(((state.x1, state.x2), state.iteration))
}

/// Extrinsic erasure curve h(eps) sampled from eps = 1 downward in steps
/// of `grid` until `eps_min`, tracking the fixed-point branch reached
/// from all-ones (each point warm-starts at the previous fixed point).
/// Below the BP threshold the branch collapses and h drops to 0.
pub fn exit_curve(
    params: &UnifiedParams,
    transfer: &TrellisTransfer,
    grid: f64,
    eps_min: f64,
) -> Result<Vec<ExitPoint>> {
    if !(grid > 0.0 && grid <= 1e-3) {
        return Err(Error::InvalidInput(alloc::format!(
            "curve grid must be in (0, 1e-3], got {grid}"
        )));
    }
    check_eps(eps_min)?;
    let mut pts = Vec::new();
    let mut x = (1.0, 1.0);
    let mut k = 0u64;
    loop {
        let eps = (1.0 - k as f64 * grid).max(eps_min);
        let (fx, _) = settle(params, eps, transfer, x)?;
        x = fx;
        pts.push(ExitPoint {
            eps,
            x1: x.0,
            x2: x.1,
            h: exit_fraction(params, x.0, x.1),
        });
        if eps <= eps_min {
            return Ok(pts);
        }
        k += 1;
    }
}

/// Channel parameter at which the area under the fixed-point extrinsic
/// erasure curve balances the code rate.
///
/// Normalization, validated against all four family rows: with h as in
/// [`exit_curve`] (so h(1) = 1), the threshold is the root of
/// `integral of h over [eps_map, 1] = design_rate`. Equivalently the
/// unnormalized per-N erasure area `x1^q + rho1 l1 x2 + rho2 l2 x1 x2`
/// integrates to exactly 1, the information content per trellis block.
///
/// Composite trapezoid on the `grid` spacing, warm-started downward from
/// eps = 1; the bracketing cell is then subdivided until narrower than
/// `tol` and the root interpolated linearly. The curve must be reached
/// before the fixed point collapses (the BP jump), otherwise the area
/// never accumulates to the rate and the sweep fails.
pub fn map_threshold(
    params: &UnifiedParams,
    transfer: &TrellisTransfer,
    grid: f64,
    tol: f64,
) -> Result<ThresholdResult> {
    if !(grid > 0.0 && grid <= 1e-3) {
        return Err(Error::InvalidInput(alloc::format!(
            "integration grid must be in (0, 1e-3], got {grid}"
        )));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidInput(alloc::format!(
            "bracket tolerance must be positive, got {tol}"
        )));
    }
    let rate = params.design_rate();
    let mut spent = 0u64;

    // Outer sweep: walk down from 1 until the trapezoid area crosses the
    // rate. State: previous grid point (eps, h, cumulative area, fixed
    // point for warm starting).
    let mut hi_eps = 1.0f64;
    let (mut hi_x, it) = settle(params, 1.0, transfer, (1.0, 1.0))?;
    spent += it;
    let mut hi_h = exit_fraction(params, hi_x.0, hi_x.1);
    let mut hi_area = 0.0f64;
    let (mut lo_eps, mut lo_area);
    loop {
        let eps = (hi_eps - grid).max(0.0);
        let (x, it) = settle(params, eps, transfer, hi_x)?;
        spent += it;
        let h = exit_fraction(params, x.0, x.1);
        if h > hi_h + 1e-9 {
            return Err(Error::NonConvergence { iterations: spent });
        }
        let area = hi_area + 0.5 * (hi_h + h) * (hi_eps - eps);
        if area >= rate {
            lo_eps = eps;
            lo_area = area;
            break;
        }
        if eps <= 0.0 || eps * ipow(x.0, params.q()) < P_TARGET {
            // Fixed point collapsed (or channel exhausted) before the
            // area balanced: no root on the tracked branch.
            return Err(Error::NonConvergence { iterations: spent });
        }
        hi_eps = eps;
        hi_x = x;
        hi_h = h;
        hi_area = area;
    }

    // Refine the bracketing cell: re-integrate it on an 8x finer grid,
    // keeping the cumulative area consistent with the coarse part above.
    while hi_eps - lo_eps > tol {
        let step = (hi_eps - lo_eps) / 8.0;
        let (mut e0, mut x0, mut h0, mut a0) = (hi_eps, hi_x, hi_h, hi_area);
        loop {
            let e1 = (e0 - step).max(lo_eps);
            let (x1, it) = settle(params, e1, transfer, x0)?;
            spent += it;
            let h1 = exit_fraction(params, x1.0, x1.1);
            let a1 = a0 + 0.5 * (h0 + h1) * (e0 - e1);
            if a1 >= rate || e1 <= lo_eps {
                hi_eps = e0;
                hi_x = x0;
                hi_h = h0;
                hi_area = a0;
                lo_eps = e1;
                lo_area = a1;
                break;
            }
            e0 = e1;
            x0 = x1;
            h0 = h1;
            a0 = a1;
        }
    }

    // Linear interpolation of the area within the final bracket.
    let frac = if lo_area > hi_area {
        ((rate - hi_area) / (lo_area - hi_area)).clamp(0.0, 1.0)
    } else {
        0.5
    };
    Ok(ThresholdResult {
        value: hi_eps - frac * (hi_eps - lo_eps),
        lo: lo_eps,
        hi: hi_eps,
        tol,
        de_iterations: spent,
        degeneracy: Degeneracy::None,
    })
}

struct GdEdge {
    sockets_per_bit: u32,
    /// Socket count in units of N: variable multiplier times
    /// sockets_per_bit. Numerator of the port mixture weight.
    weight: f64,
}

struct GdFactor {
    transfer: TrellisTransfer,
    sections: f64,
    /// Edge ids per port, in declaration order.
    ports: Vec<Vec<usize>>,
}

/// Flooding-schedule density evolution on a compact graph, one erasure
/// probability per (factor, port, edge). Permutations are ignored:
/// messages are treated as i.i.d. across sockets, which is exact in the
/// uniform-random-interleaver average.
pub struct GraphDe {
    rhos: Vec<f64>,
    info_vars: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
    edges: Vec<GdEdge>,
    factors: Vec<GdFactor>,
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphDeRun {
    pub converged: bool,
    /// Worst a-posteriori erasure probability over information variables.
    pub p_a: f64,
    pub iterations: u64,
    /// Final factor-to-variable erasure probability per edge.
    pub edge_erasure: Vec<f64>,
}

impl GraphDe {
    pub fn new(graph: &CompactGraph) -> Result<Self> {
        graph.validate()?;
        let mut edges = Vec::new();
        let mut var_edges = vec![Vec::new(); graph.vars.len()];
        let mut factors = Vec::new();
        for f in &graph.factors {
            let mut ports = Vec::with_capacity(f.ports.len());
            for port in &f.ports {
                let mut ids = Vec::with_capacity(port.edges.len());
                for e in &port.edges {
                    let id = edges.len();
                    edges.push(GdEdge {
                        sockets_per_bit: e.sockets_per_bit,
                        weight: (graph.vars[e.var].multiplier * e.sockets_per_bit) as f64,
                    });
                    var_edges[e.var].push(id);
                    ids.push(id);
                }
                ports.push(ids);
            }
            factors.push(GdFactor {
                transfer: TrellisTransfer::new(&f.trellis)?,
                sections: f.sections as f64,
                ports,
            });
        }
        Ok(GraphDe {
            rhos: graph.vars.iter().map(|v| v.rho).collect(),
            info_vars: graph
                .vars
                .iter()
                .enumerate()
                .filter(|(_, v)| v.role == VarRole::Information)
                .map(|(i, _)| i)
                .collect(),
            var_edges,
            edges,
            factors,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Variable-to-factor extrinsic for every edge: channel term times
    /// the product of factor-to-variable messages over all other socket
    /// attachments of the variable (own edge counted sockets_per_bit - 1
    /// times).
    fn var_update(&self, eps: f64, x: &[f64], a: &mut [f64]) {
        for (v, ids) in self.var_edges.iter().enumerate() {
            let chan = channel_term(self.rhos[v], eps);
            for &e in ids {
                let mut prod = 1.0;
                for &o in ids {
                    let copies = if o == e {
                        self.edges[o].sockets_per_bit - 1
                    } else {
                        self.edges[o].sockets_per_bit
                    };
                    prod *= ipow(x[o], copies);
                }
                a[e] = chan * prod;
            }
        }
    }

    fn factor_update(&self, a: &[f64], x_next: &mut [f64], priors: &mut Vec<f64>) -> Result<()> {
        for f in &self.factors {
            priors.clear();
            for ids in &f.ports {
                let mut num = 0.0;
                for &e in ids {
                    num += self.edges[e].weight * a[e];
                }
                priors.push(num / f.sections);
            }
            let out = f.transfer.eval(priors)?;
            for (pi, ids) in f.ports.iter().enumerate() {
                for &e in ids {
                    x_next[e] = out[pi];
                }
            }
        }
        Ok(())
    }

    fn posteriori(&self, eps: f64, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for &v in &self.info_vars {
            let chan = channel_term(self.rhos[v], eps);
            let mut prod = 1.0;
            for &e in &self.var_edges[v] {
                prod *= ipow(x[e], self.edges[e].sockets_per_bit);
            }
            worst = worst.max(chan * prod);
        }
        worst
    }

    /// As [`de_run`]: flooding iterations from all-erased until the total
    /// message movement drops below `tol` or `max_iter` is hit.
    pub fn run(&self, eps: f64, max_iter: u64, tol: f64) -> Result<GraphDeRun> {
        self.run_inner(eps, max_iter, tol, false, &mut |_| {})
    }

    /// Same, handing every iterate (including the all-ones start) to
    /// `sink` for trace capture.
    pub fn run_traced(
        &self,
        eps: f64,
        max_iter: u64,
        tol: f64,
        sink: &mut dyn FnMut(&[f64]),
    ) -> Result<GraphDeRun> {
        self.run_inner(eps, max_iter, tol, false, sink)
    }

    fn run_inner(
        &self,
        eps: f64,
        max_iter: u64,
        tol: f64,
        stop_on_target: bool,
        sink: &mut dyn FnMut(&[f64]),
    ) -> Result<GraphDeRun> {
        check_eps(eps)?;
        if tol <= 0.0 {
            return Err(Error::InvalidInput(alloc::format!(
                "fixed-point tolerance must be positive, got {tol}"
            )));
        }
        let n = self.edges.len();
        let mut x = vec![1.0f64; n];
        let mut x_next = vec![0.0f64; n];
        let mut a = vec![0.0f64; n];
        let mut priors = Vec::with_capacity(4);
        sink(&x);
        let mut iterations = 0u64;
        while iterations < max_iter {
            self.var_update(eps, &x, &mut a);
            self.factor_update(&a, &mut x_next, &mut priors)?;
            iterations += 1;
            let moved: f64 = x
                .iter()
                .zip(x_next.iter())
                .map(|(o, n)| (n - o).abs())
                .sum();
            core::mem::swap(&mut x, &mut x_next);
            sink(&x);
            if stop_on_target && self.posteriori(eps, &x) < P_TARGET {
                break;
            }
            if moved < tol {
                break;
            }
        }
        let p_a = self.posteriori(eps, &x);
        Ok(GraphDeRun {
            converged: p_a < P_TARGET,
            p_a,
            iterations,
            edge_erasure: x,
        })
    }

    /// BP threshold of the graph, by bisection as [`bp_threshold`].
    pub fn threshold(&self, tol: f64) -> Result<ThresholdResult> {
        bisect_threshold(
            |eps| {
                let run = self.run_inner(eps, MAX_ITER, FIXED_POINT_TOL, true, &mut |_| {})?;
                Ok((run.converged, run.iterations))
            },
            tol,
        )
    }
}

/// Convenience wrapper: build the transfers and run graph DE once.
pub fn graph_de_run(
    graph: &CompactGraph,
    eps: f64,
    max_iter: u64,
    tol: f64,
) -> Result<GraphDeRun> {
    GraphDe::new(graph)?.run(eps, max_iter, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        default_rate1_generator, original_ensemble, unified_ensemble, ComponentSet, TcClass,
    };
    use crate::trellis::build_trellis;

    fn five_seven() -> TrellisTransfer {
        TrellisTransfer::new(&build_trellis(&[default_rate1_generator()]).unwrap()).unwrap()
    }

    #[test]
    fn repeat_only_row_reduces_to_the_scalar_recursion() {
        let params = UnifiedParams::for_class(TcClass::Pcc);
        let tr = five_seven();
        for eps in [0.1, 0.35, 0.62, 0.9] {
            let mut s = DeState::start(&params, eps);
            for _ in 0..5 {
                let next = de_step(&params, eps, &s, &tr).unwrap();
                let direct = tr.eval(&[eps * s.x1, eps]).unwrap();
                assert_eq!(next.x1, direct[0]);
                assert_eq!(next.x2, direct[1]);
                assert_eq!(next.p_a, eps * (next.x1 * next.x1));
                s = next;
            }
        }
    }

    #[test]
    fn zero_channel_clears_in_one_step() {
        for class in TcClass::ALL {
            let params = UnifiedParams::for_class(class);
            let tr = five_seven();
            let s = de_step(&params, 0.0, &DeState::start(&params, 0.0), &tr).unwrap();
            // Only the never-transmitted part can stay erased; the
            // information estimate must already be perfect.
            assert_eq!(s.p_a, 0.0, "{class}");
            if params.rho1() > 0.99 && params.rho2().unwrap_or(1.0) > 0.99 {
                assert_eq!((s.x1, s.x2), (0.0, 0.0), "{class}");
            }
        }
    }

    #[test]
    fn full_erasure_is_a_fixed_point() {
        let params = UnifiedParams::for_class(TcClass::Scc);
        let tr = five_seven();
        let run = de_run(&params, 1.0, &tr, 50, 1e-12).unwrap();
        assert!(!run.converged);
        assert_eq!(run.state.x1, 1.0);
        assert_eq!(run.state.x2, 1.0);
        assert!(run.trace.len() <= 3, "should stop moving immediately");
    }

    #[test]
    fn iterates_decrease_and_dominate_in_eps() {
        let params = UnifiedParams::for_class(TcClass::Scc);
        let tr = five_seven();
        let lo = de_run(&params, 0.55, &tr, 200, 1e-12).unwrap();
        let hi = de_run(&params, 0.60, &tr, 200, 1e-12).unwrap();
        for w in lo.trace.windows(2) {
            assert!(w[1].x1 <= w[0].x1 + 1e-15);
            assert!(w[1].x2 <= w[0].x2 + 1e-15);
        }
        for (a, b) in lo.trace.iter().zip(hi.trace.iter()) {
            assert!(a.x1 <= b.x1 + 1e-15);
            assert!(a.x2 <= b.x2 + 1e-15);
        }
    }

    #[test]
    fn convergence_flips_across_the_repeat_only_threshold() {
        let params = UnifiedParams::for_class(TcClass::Pcc);
        let tr = five_seven();
        assert!(de_run(&params, 0.60, &tr, MAX_ITER, 1e-12).unwrap().converged);
        assert!(!de_run(&params, 0.66, &tr, MAX_ITER, 1e-12).unwrap().converged);
    }

    #[test]
    fn repeat_only_threshold_bracket() {
        let params = UnifiedParams::for_class(TcClass::Pcc);
        let tr = five_seven();
        let t = bp_threshold(&params, &tr, 1e-3).unwrap();
        assert_eq!(t.degeneracy, Degeneracy::None);
        assert!(t.lo <= t.value && t.value <= t.hi);
        assert!(t.hi - t.lo <= 1e-3 + 1e-12);
        assert!((t.value - 0.6428).abs() < 2e-3, "got {}", t.value);
    }

    #[test]
    fn rejects_unsupported_tolerances() {
        let params = UnifiedParams::for_class(TcClass::Pcc);
        let tr = five_seven();
        assert!(bp_threshold(&params, &tr, 1e-6).is_err());
        assert!(de_run(&params, 0.5, &tr, 10, 0.0).is_err());
        assert!(map_threshold(&params, &tr, 0.01, 1e-4).is_err());
    }

    #[test]
    fn degenerate_predicates_are_flagged() {
        let always = bisect_threshold(|_| Ok((true, 1)), 1e-4).unwrap();
        assert_eq!(always.degeneracy, Degeneracy::ConvergesEverywhere);
        assert_eq!(always.value, 1.0);
        let never = bisect_threshold(|_| Ok((false, 1)), 1e-4).unwrap();
        assert_eq!(never.degeneracy, Degeneracy::ConvergesNowhere);
        assert_eq!(never.value, 0.0);
    }

    #[test]
    fn graph_recursion_is_bit_identical_on_family_rows() {
        for class in [TcClass::Pcc, TcClass::Scc, TcClass::Hcc, TcClass::Bcc] {
            let params = UnifiedParams::for_class(class);
            let graph = unified_ensemble(&params, default_rate1_generator()).unwrap();
            let gde = GraphDe::new(&graph).unwrap();
            let tr = five_seven();
            let eps = 0.5;
            let reference = de_run(&params, eps, &tr, 40, 0.0_f64.max(1e-300)).unwrap();
            let mut got: Vec<Vec<f64>> = Vec::new();
            gde.run_traced(eps, 40, 1e-300, &mut |x| got.push(x.to_vec()))
                .unwrap();
            assert_eq!(got.len(), reference.trace.len());
            // Edge order: input port (u, then fed-back part), parity port
            // (transmitted-only, then fed-back part).
            let x2_edge = if params.l2() > 0 { 2 } else { 1 };
            for (gx, st) in got.iter().zip(reference.trace.iter()) {
                assert_eq!(gx[0], st.x1, "{class}");
                assert_eq!(gx[x2_edge], st.x2, "{class}");
            }
        }
    }

    #[test]
    fn classic_two_trellis_graph_matches_the_repeat_only_row() {
        // Two parallel trellises on the same information sequence carry
        // exactly the repeat-2 recursion, so the thresholds must agree.
        let graph = original_ensemble(TcClass::Pcc, &ComponentSet::default()).unwrap();
        let gde = GraphDe::new(&graph).unwrap();
        let t = gde.threshold(1e-3).unwrap();
        assert!((t.value - 0.6428).abs() < 2e-3, "got {}", t.value);
    }

    #[test]
    fn exit_curve_starts_flat_and_falls() {
        let params = UnifiedParams::for_class(TcClass::Pcc);
        let tr = five_seven();
        let pts = exit_curve(&params, &tr, 1e-3, 0.9).unwrap();
        assert_eq!(pts[0].h, 1.0, "no information at full erasure");
        for w in pts.windows(2) {
            assert!(w[1].h <= w[0].h + 1e-12);
        }
        assert!(pts.last().unwrap().h < 1.0);
    }

    #[test]
    fn repeat_only_area_balance() {
        let params = UnifiedParams::for_class(TcClass::Pcc);
        let tr = five_seven();
        let t = map_threshold(&params, &tr, 1e-3, 1e-4).unwrap();
        assert!(t.hi - t.lo <= 1e-4 + 1e-12);
        assert!((t.value - 0.6552).abs() < 1e-3, "got {}", t.value);
    }
}
