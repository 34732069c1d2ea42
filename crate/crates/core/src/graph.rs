//! Compact code graphs: trellis factor nodes, variable nodes, and the
//! wiring between them.
//!
//! A graph is written in units of a block length `N`: variable nodes carry
//! length multipliers, factor nodes section multipliers, and every port of
//! a factor lists which variables feed it (with repetition counts) plus a
//! permutation descriptor. The same data model expresses the classic
//! two- and three-trellis turbo ensembles and the single-trellis
//! self-concatenated family parameterized by [`UnifiedParams`]; density
//! evolution, instantiation and encoding all consume it uniformly.
//!
//! Port slot convention: the slots of a port are the concatenation of its
//! edge segments in order, each segment being `sockets_per_bit` whole
//! copies of the variable's bit vector. On input ports the trellis socket
//! `t` reads slot `perm.src(t)`; on the parity port slot `j` reads parity
//! socket `perm.src(j)`. Multi-input trellises wire each input position
//! as its own port, positions first, parity port last.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::trellis::{build_trellis, RationalGenerator, Trellis};

/// The four turbo-like code classes covered by the ensemble family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TcClass {
    Pcc,
    Scc,
    Bcc,
    Hcc,
}

impl TcClass {
    pub const ALL: [TcClass; 4] = [TcClass::Pcc, TcClass::Scc, TcClass::Bcc, TcClass::Hcc];

    pub fn name(self) -> &'static str {
        match self {
            TcClass::Pcc => "PCC",
            TcClass::Scc => "SCC",
            TcClass::Bcc => "BCC",
            TcClass::Hcc => "HCC",
        }
    }
}

impl core::str::FromStr for TcClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pcc" => Ok(TcClass::Pcc),
            "scc" => Ok(TcClass::Scc),
            "bcc" => Ok(TcClass::Bcc),
            "hcc" => Ok(TcClass::Hcc),
            other => Err(Error::InvalidInput(format!(
                "unknown code class {other:?} (expected pcc, scc, bcc or hcc)"
            ))),
        }
    }
}

impl core::fmt::Display for TcClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of one member of the self-concatenated family.
///
/// The information sequence (length N) is repeated `q = l1` times,
/// multiplexed with the fed-back parity part `v2` (length `l2`·N) and fed
/// to a rate-1 trellis of `l = l1 + l2` sections per N. The parity splits
/// into `v1` (`l1`·N bits, transmitted-only, surviving puncturing at rate
/// `rho1`) and `v2` (`l2`·N bits, fed back, surviving at `rho2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnifiedParams {
    l1: u32,
    l2: u32,
    rho1: f64,
    rho2: Option<f64>,
}

impl UnifiedParams {
    pub fn new(l1: u32, l2: u32, rho1: f64, rho2: Option<f64>) -> Result<Self> {
        if l1 == 0 {
            return Err(Error::InvalidInput(String::from(
                "l1 must be positive (it doubles as the repetition factor)",
            )));
        }
        if !(0.0..=1.0).contains(&rho1) {
            return Err(Error::InvalidInput(format!("rho1 = {rho1} outside [0,1]")));
        }
        match (l2, rho2) {
            (0, Some(_)) => {
                return Err(Error::InvalidInput(String::from(
                    "rho2 is meaningless without a fed-back parity part (l2 = 0)",
                )))
            }
            (0, None) => {}
            (_, None) => {
                return Err(Error::InvalidInput(String::from(
                    "rho2 required when l2 > 0",
                )))
            }
            (_, Some(r)) if !(0.0..=1.0).contains(&r) => {
                return Err(Error::InvalidInput(format!("rho2 = {r} outside [0,1]")));
            }
            _ => {}
        }
        Ok(UnifiedParams {
            l1,
            l2,
            rho1,
            rho2,
        })
    }

    /// The parameter row reproducing the given turbo-like class.
    pub fn for_class(class: TcClass) -> Self {
        let (l1, l2, rho1, rho2) = match class {
            TcClass::Pcc => (2, 0, 1.0, None),
            TcClass::Scc => (2, 1, 1.0, Some(1.0)),
            TcClass::Bcc => (2, 2, 0.0, Some(1.0)),
            TcClass::Hcc => (2, 2, 1.0, Some(1.0)),
        };
        UnifiedParams {
            l1,
            l2,
            rho1,
            rho2,
        }
    }

    pub fn l1(&self) -> u32 {
        self.l1
    }

    pub fn l2(&self) -> u32 {
        self.l2
    }

    /// Trellis sections per information bit; also the parity length
    /// multiplier.
    pub fn l(&self) -> u32 {
        self.l1 + self.l2
    }

    /// Repetition factor of the information sequence. Equal to `l1`: the
    /// trellis consumes `l`·N input bits, of which `l2`·N come from the
    /// feedback, so the repeated information part must fill `l1`·N.
    pub fn q(&self) -> u32 {
        self.l1
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    pub fn rho2(&self) -> Option<f64> {
        self.rho2
    }

    /// Information bits over transmitted bits.
    pub fn design_rate(&self) -> f64 {
        1.0 / (1.0 + self.rho1 * self.l1 as f64 + self.rho2.unwrap_or(0.0) * self.l2 as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    Information,
    Parity,
}

/// One bit sequence of the code.
#[derive(Debug, Clone)]
pub struct VariableNode {
    pub name: &'static str,
    pub role: VarRole,
    /// Bits = multiplier × N.
    pub multiplier: u32,
    /// Fraction surviving puncturing (1 = fully transmitted).
    pub rho: f64,
}

/// How one port's sockets map to its slot layout.
#[derive(Debug, Clone)]
pub enum PermutationDescriptor {
    Identity,
    /// Drawn uniformly at instantiation from the code seed.
    UniformRandom,
    /// Explicit blocks along the diagonal, in slot order.
    BlockDiagonal(Vec<Perm>),
    /// Two equal blocks swapped crosswise (see [`Perm::anti_diagonal`]).
    AntiDiagonal(Perm, Perm),
    Explicit(Perm),
}

impl PermutationDescriptor {
    /// Concrete bijection of length `n`; random kinds draw from `rng`.
    pub fn resolve(&self, n: usize, rng: &mut ChaCha12Rng) -> Result<Perm> {
        let built = match self {
            PermutationDescriptor::Identity => Perm::identity(n),
            PermutationDescriptor::UniformRandom => Perm::uniform(n, rng),
            PermutationDescriptor::BlockDiagonal(blocks) => {
                let refs: Vec<&Perm> = blocks.iter().collect();
                Perm::block_diagonal(&refs)
            }
            PermutationDescriptor::AntiDiagonal(up, low) => {
                if up.len() != low.len() {
                    return Err(Error::InvalidInput(String::from(
                        "anti-diagonal blocks must have equal length",
                    )));
                }
                Perm::anti_diagonal(up, low)
            }
            PermutationDescriptor::Explicit(p) => p.clone(),
        };
        if built.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: built.len(),
            });
        }
        Ok(built)
    }
}

/// One segment of a port's slot layout: `sockets_per_bit` copies of a
/// variable node.
#[derive(Debug, Clone, Copy)]
pub struct EdgeRef {
    pub var: usize,
    pub sockets_per_bit: u32,
}

#[derive(Debug, Clone)]
pub struct PortWiring {
    pub edges: Vec<EdgeRef>,
    pub perm: PermutationDescriptor,
}

/// A trellis constraint spanning `sections`·N sections, possibly split
/// into independently started blocks (each block begins in state zero, as
/// the separate component encoders of the classic ensembles do).
#[derive(Debug, Clone)]
pub struct FactorNode {
    pub trellis: Trellis,
    /// Sections = multiplier × N.
    pub sections: u32,
    /// Per-block section multipliers; must sum to `sections`.
    pub blocks: Vec<u32>,
    /// Input positions in order, then the parity port.
    pub ports: Vec<PortWiring>,
}

#[derive(Debug, Clone)]
pub struct CompactGraph {
    pub vars: Vec<VariableNode>,
    pub factors: Vec<FactorNode>,
}

impl CompactGraph {
    pub fn validate(&self) -> Result<()> {
        for v in &self.vars {
            if v.multiplier == 0 {
                return Err(Error::InvalidInput(format!(
                    "variable {} has zero length",
                    v.name
                )));
            }
            if !(0.0..=1.0).contains(&v.rho) {
                return Err(Error::InvalidInput(format!(
                    "variable {} has permeability {} outside [0,1]",
                    v.name, v.rho
                )));
            }
        }
        let mut degree = vec![0u32; self.vars.len()];
        for (fi, f) in self.factors.iter().enumerate() {
            if f.ports.len() != f.trellis.input_arity() + 1 {
                return Err(Error::InvalidInput(format!(
                    "factor {fi}: {} ports for a trellis with {} positions",
                    f.ports.len(),
                    f.trellis.input_arity() + 1
                )));
            }
            if f.blocks.iter().sum::<u32>() != f.sections || f.blocks.contains(&0) {
                return Err(Error::InvalidInput(format!(
                    "factor {fi}: blocks {:?} do not partition {} sections",
                    f.blocks, f.sections
                )));
            }
            for (pi, port) in f.ports.iter().enumerate() {
                let mut filled = 0u32;
                for e in &port.edges {
                    let v = self.vars.get(e.var).ok_or_else(|| {
                        Error::InvalidInput(format!("factor {fi} references variable {}", e.var))
                    })?;
                    if e.sockets_per_bit == 0 {
                        return Err(Error::InvalidInput(format!(
                            "factor {fi} port {pi}: zero-copy edge to {}",
                            v.name
                        )));
                    }
                    filled += v.multiplier * e.sockets_per_bit;
                    degree[e.var] += e.sockets_per_bit;
                }
                if filled != f.sections {
                    return Err(Error::InvalidInput(format!(
                        "factor {fi} port {pi}: edges fill {filled}·N of {}·N sockets",
                        f.sections
                    )));
                }
                let parity_port = pi == f.ports.len() - 1;
                if parity_port && port.edges.iter().any(|e| e.sockets_per_bit != 1) {
                    return Err(Error::InvalidInput(format!(
                        "factor {fi}: parity bits are produced once; sockets_per_bit must be 1"
                    )));
                }
            }
        }
        if let Some(v) = degree.iter().position(|&d| d == 0) {
            return Err(Error::InvalidInput(format!(
                "variable {} is attached to nothing",
                self.vars[v].name
            )));
        }
        Ok(())
    }

    /// Total edge repetitions of one variable across all ports.
    pub fn var_degree(&self, var: usize) -> u32 {
        self.factors
            .iter()
            .flat_map(|f| f.ports.iter())
            .flat_map(|p| p.edges.iter())
            .filter(|e| e.var == var)
            .map(|e| e.sockets_per_bit)
            .sum()
    }

    /// Information bits over transmitted bits, ignoring termination.
    pub fn design_rate(&self) -> f64 {
        let info: f64 = self
            .vars
            .iter()
            .filter(|v| v.role == VarRole::Information)
            .map(|v| v.multiplier as f64)
            .sum();
        let sent: f64 = self
            .vars
            .iter()
            .map(|v| v.rho * v.multiplier as f64)
            .sum();
        info / sent
    }
}

/// Default rate-1 component: (1 + D^2)/(1 + D + D^2), octal 5/7.
pub fn default_rate1_generator() -> RationalGenerator {
    RationalGenerator::new(0o5, 0o7).unwrap()
}

/// Default two-input component for the braided class: the message input
/// enters through feedforward 1, the crossed parity through feedforward 5,
/// over the shared feedback 7.
pub fn default_rate2_generators() -> [RationalGenerator; 2] {
    [
        RationalGenerator::new(0o1, 0o7).unwrap(),
        RationalGenerator::new(0o5, 0o7).unwrap(),
    ]
}

/// Single-trellis self-concatenated ensemble for the given parameters.
/// All permutations are uniform-random; one block (no internal restarts).
pub fn unified_ensemble(params: &UnifiedParams, gen: RationalGenerator) -> Result<CompactGraph> {
    let trellis = build_trellis(&[gen])?;
    let l = params.l();
    let mut vars = vec![
        VariableNode {
            name: "u",
            role: VarRole::Information,
            multiplier: 1,
            rho: 1.0,
        },
        VariableNode {
            name: "v1",
            role: VarRole::Parity,
            multiplier: params.l1(),
            rho: params.rho1(),
        },
    ];
    let mut input_edges = vec![EdgeRef {
        var: 0,
        sockets_per_bit: params.q(),
    }];
    let mut parity_edges = vec![EdgeRef {
        var: 1,
        sockets_per_bit: 1,
    }];
    if params.l2() > 0 {
        vars.push(VariableNode {
            name: "v2",
            role: VarRole::Parity,
            multiplier: params.l2(),
            rho: params.rho2().unwrap(),
        });
        input_edges.push(EdgeRef {
            var: 2,
            sockets_per_bit: 1,
        });
        parity_edges.push(EdgeRef {
            var: 2,
            sockets_per_bit: 1,
        });
    }
    let graph = CompactGraph {
        vars,
        factors: vec![FactorNode {
            trellis,
            sections: l,
            blocks: vec![l],
            ports: vec![
                PortWiring {
                    edges: input_edges,
                    perm: PermutationDescriptor::UniformRandom,
                },
                PortWiring {
                    edges: parity_edges,
                    perm: PermutationDescriptor::UniformRandom,
                },
            ],
        }],
    };
    graph.validate()?;
    Ok(graph)
}

/// Component generators for the classic multi-trellis ensembles.
#[derive(Debug, Clone, Copy)]
pub struct ComponentSet {
    pub rate1: RationalGenerator,
    pub rate2: [RationalGenerator; 2],
}

impl Default for ComponentSet {
    fn default() -> Self {
        ComponentSet {
            rate1: default_rate1_generator(),
            rate2: default_rate2_generators(),
        }
    }
}

/// The classic multi-trellis ensemble of a class, with uniform-random
/// permutations everywhere a figure draws one.
pub fn original_ensemble(class: TcClass, comps: &ComponentSet) -> Result<CompactGraph> {
    original_with_perms(class, comps, None, 0)
}

/// Same graphs with explicit component permutations, for bit-exact
/// equivalence checks: PCC `[P]` (information reorder of the lower
/// encoder), SCC `[P_I]` (inner input, length 2N), HCC `[P_L, P_I]`,
/// BCC `[P, P_U, P_L]` (information reorder, parity-to-upper,
/// parity-to-lower). `n` is the block length the permutations were built
/// for.
pub fn original_ensemble_explicit(
    class: TcClass,
    comps: &ComponentSet,
    perms: &[Perm],
    n: usize,
) -> Result<CompactGraph> {
    original_with_perms(class, comps, Some(perms), n)
}

fn expect_perm(perms: &[Perm], idx: usize, len: usize) -> Result<PermutationDescriptor> {
    let p = perms.get(idx).ok_or_else(|| {
        Error::InvalidInput(format!("missing component permutation {idx}"))
    })?;
    if p.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: p.len(),
        });
    }
    Ok(PermutationDescriptor::Explicit(p.clone()))
}

fn original_with_perms(
    class: TcClass,
    comps: &ComponentSet,
    perms: Option<&[Perm]>,
    n: usize,
) -> Result<CompactGraph> {
    let rate1 = build_trellis(&[comps.rate1])?;
    let pick = |idx: usize, len_mult: usize| -> Result<PermutationDescriptor> {
        match perms {
            None => Ok(PermutationDescriptor::UniformRandom),
            Some(ps) => expect_perm(ps, idx, len_mult * n),
        }
    };
    let var = |name, role, multiplier| VariableNode {
        name,
        role,
        multiplier,
        rho: 1.0,
    };
    let e = |v: usize| EdgeRef {
        var: v,
        sockets_per_bit: 1,
    };
    let port = |edges: Vec<EdgeRef>, perm| PortWiring { edges, perm };
    let ident = || PermutationDescriptor::Identity;

    let graph = match class {
        TcClass::Pcc => CompactGraph {
            vars: vec![
                var("u", VarRole::Information, 1),
                var("vU", VarRole::Parity, 1),
                var("vL", VarRole::Parity, 1),
            ],
            factors: vec![
                FactorNode {
                    trellis: rate1.clone(),
                    sections: 1,
                    blocks: vec![1],
                    ports: vec![port(vec![e(0)], ident()), port(vec![e(1)], ident())],
                },
                FactorNode {
                    trellis: rate1,
                    sections: 1,
                    blocks: vec![1],
                    ports: vec![port(vec![e(0)], pick(0, 1)?), port(vec![e(2)], ident())],
                },
            ],
        },
        TcClass::Scc => CompactGraph {
            vars: vec![
                var("u", VarRole::Information, 1),
                var("vO", VarRole::Parity, 1),
                var("vI", VarRole::Parity, 2),
            ],
            factors: vec![
                FactorNode {
                    trellis: rate1.clone(),
                    sections: 1,
                    blocks: vec![1],
                    ports: vec![port(vec![e(0)], ident()), port(vec![e(1)], ident())],
                },
                FactorNode {
                    trellis: rate1,
                    sections: 2,
                    blocks: vec![2],
                    ports: vec![
                        port(vec![e(0), e(1)], pick(0, 2)?),
                        port(vec![e(2)], ident()),
                    ],
                },
            ],
        },
        TcClass::Hcc => CompactGraph {
            vars: vec![
                var("u", VarRole::Information, 1),
                var("vU", VarRole::Parity, 1),
                var("vL", VarRole::Parity, 1),
                var("vI", VarRole::Parity, 2),
            ],
            factors: vec![
                FactorNode {
                    trellis: rate1.clone(),
                    sections: 1,
                    blocks: vec![1],
                    ports: vec![port(vec![e(0)], ident()), port(vec![e(1)], ident())],
                },
                FactorNode {
                    trellis: rate1.clone(),
                    sections: 1,
                    blocks: vec![1],
                    ports: vec![port(vec![e(0)], pick(0, 1)?), port(vec![e(2)], ident())],
                },
                FactorNode {
                    trellis: rate1,
                    sections: 2,
                    blocks: vec![2],
                    ports: vec![
                        port(vec![e(1), e(2)], pick(1, 2)?),
                        port(vec![e(3)], ident()),
                    ],
                },
            ],
        },
        TcClass::Bcc => {
            let rate2 = build_trellis(&comps.rate2)?;
            CompactGraph {
                vars: vec![
                    var("u", VarRole::Information, 1),
                    var("vU", VarRole::Parity, 1),
                    var("vL", VarRole::Parity, 1),
                ],
                factors: vec![
                    FactorNode {
                        trellis: rate2.clone(),
                        sections: 1,
                        blocks: vec![1],
                        ports: vec![
                            port(vec![e(0)], ident()),
                            port(vec![e(2)], pick(1, 1)?),
                            port(vec![e(1)], ident()),
                        ],
                    },
                    FactorNode {
                        trellis: rate2,
                        sections: 1,
                        blocks: vec![1],
                        ports: vec![
                            port(vec![e(0)], pick(0, 1)?),
                            port(vec![e(1)], pick(2, 1)?),
                            port(vec![e(2)], ident()),
                        ],
                    },
                ],
            }
        }
    };
    graph.validate()?;
    Ok(graph)
}

/// The structured input-side permutation that makes the single-trellis
/// encoder bit-exact equivalent to the classic one. Component list and
/// `n` as in [`original_ensemble_explicit`]; for the braided class this
/// is the first-input reordering, the feedback side being
/// [`bcc_feedback_permutation`].
pub fn equivalent_permutation(
    class: TcClass,
    perms: &[Perm],
    n: usize,
) -> Result<PermutationDescriptor> {
    let need = |idx: usize, len: usize| -> Result<Perm> {
        let p = perms.get(idx).ok_or_else(|| {
            Error::InvalidInput(format!("missing component permutation {idx}"))
        })?;
        if p.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: p.len(),
            });
        }
        Ok(p.clone())
    };
    Ok(match class {
        TcClass::Pcc => {
            PermutationDescriptor::BlockDiagonal(vec![Perm::identity(n), need(0, n)?])
        }
        TcClass::Scc => {
            PermutationDescriptor::BlockDiagonal(vec![Perm::identity(n), need(0, 2 * n)?])
        }
        TcClass::Hcc => PermutationDescriptor::BlockDiagonal(vec![
            Perm::identity(n),
            need(0, n)?,
            need(1, 2 * n)?,
        ]),
        TcClass::Bcc => {
            PermutationDescriptor::BlockDiagonal(vec![Perm::identity(n), need(0, n)?])
        }
    })
}

/// Cross-feedback reordering of the single-trellis braided encoder: the
/// first half of the second input reads the second parity half through
/// `to_upper`, and vice versa through `to_lower`.
pub fn bcc_feedback_permutation(to_upper: &Perm, to_lower: &Perm) -> PermutationDescriptor {
    PermutationDescriptor::AntiDiagonal(to_upper.clone(), to_lower.clone())
}

/// Rotation mapping the slot layout (transmitted-only part first, fed-back
/// part second) onto a parity stream whose first `fed_back` sections
/// produce the fed-back part.
fn parity_split_rotation(fed_back: usize, total: usize) -> Perm {
    let fwd: Vec<u32> = (fed_back..total)
        .chain(0..fed_back)
        .map(|i| i as u32)
        .collect();
    Perm::from_forward(fwd).unwrap()
}

/// Single-trellis graph wired for bit-exact equivalence with the classic
/// encoder of `class` at block length `n`, given the same component
/// permutations as [`original_ensemble_explicit`]. The trellis restarts
/// from state zero at the block boundaries where the classic ensemble
/// switches encoders; the braided class keeps its two-input form with the
/// whole parity fed back.
pub fn unified_equivalent(
    class: TcClass,
    comps: &ComponentSet,
    perms: &[Perm],
    n: usize,
) -> Result<CompactGraph> {
    let input_perm = equivalent_permutation(class, perms, n)?;
    let var = |name, role, multiplier, rho| VariableNode {
        name,
        role,
        multiplier,
        rho,
    };
    let graph = match class {
        TcClass::Pcc => {
            let trellis = build_trellis(&[comps.rate1])?;
            CompactGraph {
                vars: vec![
                    var("u", VarRole::Information, 1, 1.0),
                    var("v1", VarRole::Parity, 2, 1.0),
                ],
                factors: vec![FactorNode {
                    trellis,
                    sections: 2,
                    blocks: vec![1, 1],
                    ports: vec![
                        PortWiring {
                            edges: vec![EdgeRef {
                                var: 0,
                                sockets_per_bit: 2,
                            }],
                            perm: input_perm,
                        },
                        PortWiring {
                            edges: vec![EdgeRef {
                                var: 1,
                                sockets_per_bit: 1,
                            }],
                            perm: PermutationDescriptor::Identity,
                        },
                    ],
                }],
            }
        }
        TcClass::Scc | TcClass::Hcc => {
            let trellis = build_trellis(&[comps.rate1])?;
            let (l1, l2, blocks) = match class {
                TcClass::Scc => (2u32, 1u32, vec![1, 2]),
                _ => (2, 2, vec![1, 1, 2]),
            };
            let l = l1 + l2;
            CompactGraph {
                vars: vec![
                    var("u", VarRole::Information, 1, 1.0),
                    var("v1", VarRole::Parity, l1, 1.0),
                    var("v2", VarRole::Parity, l2, 1.0),
                ],
                factors: vec![FactorNode {
                    trellis,
                    sections: l,
                    blocks,
                    ports: vec![
                        PortWiring {
                            edges: vec![
                                EdgeRef {
                                    var: 0,
                                    sockets_per_bit: 2,
                                },
                                EdgeRef {
                                    var: 2,
                                    sockets_per_bit: 1,
                                },
                            ],
                            perm: input_perm,
                        },
                        PortWiring {
                            edges: vec![
                                EdgeRef {
                                    var: 1,
                                    sockets_per_bit: 1,
                                },
                                EdgeRef {
                                    var: 2,
                                    sockets_per_bit: 1,
                                },
                            ],
                            perm: PermutationDescriptor::Explicit(parity_split_rotation(
                                l2 as usize * n,
                                l as usize * n,
                            )),
                        },
                    ],
                }],
            }
        }
        TcClass::Bcc => {
            let trellis = build_trellis(&comps.rate2)?;
            let to_upper = perms.get(1).cloned().unwrap_or_else(|| Perm::identity(n));
            let to_lower = perms.get(2).cloned().unwrap_or_else(|| Perm::identity(n));
            CompactGraph {
                vars: vec![
                    var("u", VarRole::Information, 1, 1.0),
                    var("v", VarRole::Parity, 2, 1.0),
                ],
                factors: vec![FactorNode {
                    trellis,
                    sections: 2,
                    blocks: vec![1, 1],
                    ports: vec![
                        PortWiring {
                            edges: vec![EdgeRef {
                                var: 0,
                                sockets_per_bit: 2,
                            }],
                            perm: input_perm,
                        },
                        PortWiring {
                            edges: vec![EdgeRef {
                                var: 1,
                                sockets_per_bit: 1,
                            }],
                            perm: bcc_feedback_permutation(&to_upper, &to_lower),
                        },
                        PortWiring {
                            edges: vec![EdgeRef {
                                var: 1,
                                sockets_per_bit: 1,
                            }],
                            perm: PermutationDescriptor::Identity,
                        },
                    ],
                }],
            }
        }
    };
    graph.validate()?;
    Ok(graph)
}
