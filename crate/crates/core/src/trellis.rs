//! Binary convolutional trellises for rate-k/1 recursive encoders.
//!
//! A trellis is the fully tabulated state machine of an encoder described by
//! one or two rational generators `feedforward(D)/feedback(D)` over GF(2).
//! Every section consumes one bit per generator (the input positions) and
//! emits a single parity bit. Systematic outputs are not the trellis's
//! business; the surrounding code graph decides which sequences reach the
//! channel.
//!
//! A single generator is realized in controller canonical form (the literal
//! shift register of the rational filter); two generators sharing a feedback
//! polynomial are realized in observer canonical form, which keeps the state
//! space at `2^m` for `m = max(deg ff_j, deg fb)`. Both forms are checked
//! against direct difference-equation oracles in the tests.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One rational generator `feedforward(D)/feedback(D)`.
///
/// Polynomials are stored with bit `i` holding the coefficient of `D^i`, so
/// the octal string "5/7" is `(1 + D^2)/(1 + D + D^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalGenerator {
    pub feedforward: u32,
    pub feedback: u32,
}

impl RationalGenerator {
    /// Builds and validates a generator from raw polynomial masks.
    pub fn new(feedforward: u32, feedback: u32) -> Result<Self> {
        let g = RationalGenerator {
            feedforward,
            feedback,
        };
        g.validate()?;
        Ok(g)
    }

    /// Parses an octal fraction such as `"5/7"` or `"15/13"`.
    pub fn from_octal(s: &str) -> Result<Self> {
        let (ff, fb) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidGenerator(format!("expected ff/fb, got {s:?}")))?;
        let parse = |part: &str| -> Result<u32> {
            u32::from_str_radix(part.trim(), 8)
                .map_err(|_| Error::InvalidGenerator(format!("bad octal digits in {s:?}")))
        };
        RationalGenerator::new(parse(ff)?, parse(fb)?)
    }

    fn validate(&self) -> Result<()> {
        if self.feedback & 1 == 0 {
            return Err(Error::InvalidGenerator(format!(
                "feedback {:o} (octal) has no constant term; the loop is not realizable",
                self.feedback
            )));
        }
        if self.feedforward == 0 {
            return Err(Error::InvalidGenerator(String::from(
                "feedforward polynomial is zero",
            )));
        }
        Ok(())
    }

    /// Encoder memory: the largest degree appearing in the fraction.
    pub fn memory(&self) -> u32 {
        let deg = |p: u32| 31 - p.leading_zeros();
        deg(self.feedforward).max(deg(self.feedback))
    }

    /// Octal rendering, the inverse of [`RationalGenerator::from_octal`].
    pub fn to_octal(&self) -> String {
        format!("{:o}/{:o}", self.feedforward, self.feedback)
    }
}

impl core::fmt::Display for RationalGenerator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{:o}/{:o}", self.feedforward, self.feedback)
    }
}

/// Parses a comma-separated list of octal generators, e.g. `"5/7"` or
/// `"5/7,3/7"`.
pub fn generators_from_octal(s: &str) -> Result<Vec<RationalGenerator>> {
    s.split(',').map(RationalGenerator::from_octal).collect()
}

/// How an encoding run treats the final state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The trellis simply stops; the final state is arbitrary.
    Unterminated,
    /// Extra tail sections drive the register to the zero state. Tail
    /// inputs are determined by the state, so they carry no information;
    /// only their parity bits join the output.
    ZeroTail,
}

/// Fully tabulated trellis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trellis {
    memory: u32,
    input_arity: usize,
    state_count: usize,
    next: Vec<u16>,
    out: Vec<u16>,
    /// Per state: the tail input symbol that moves it toward state zero.
    tail_step: Vec<u16>,
    /// Fixed number of tail sections that bring any state to zero.
    tail_len: usize,
    gens: Vec<RationalGenerator>,
}

/// Builds the trellis for one or two generators. Two generators must share
/// the feedback polynomial; they form a two-input, single-parity encoder.
pub fn build_trellis(gens: &[RationalGenerator]) -> Result<Trellis> {
    Trellis::new(gens)
}

impl Trellis {
    /// See [`build_trellis`].
    pub fn new(gens: &[RationalGenerator]) -> Result<Self> {
        match gens {
            [] => Err(Error::InvalidGenerator(String::from("empty generator list"))),
            [g] => {
                g.validate()?;
                Self::build_controller(*g)
            }
            [a, b] => {
                a.validate()?;
                b.validate()?;
                if a.feedback != b.feedback {
                    return Err(Error::InvalidGenerator(format!(
                        "two-input encoders share one feedback polynomial, got {:o} and {:o}",
                        a.feedback, b.feedback
                    )));
                }
                Self::build_observer([*a, *b])
            }
            _ => Err(Error::InvalidGenerator(format!(
                "at most two generators are supported, got {}",
                gens.len()
            ))),
        }
    }

    /// Parses octal generators and builds the trellis in one step.
    pub fn from_octal(s: &str) -> Result<Self> {
        Self::new(&generators_from_octal(s)?)
    }

    /// Controller canonical form for a single rational generator. State bit
    /// `j` holds the register value from `j + 1` steps ago.
    fn build_controller(g: RationalGenerator) -> Result<Self> {
        let m = g.memory();
        if m == 0 {
            return Err(Error::InvalidGenerator(String::from(
                "memoryless generator; nothing to build a trellis from",
            )));
        }
        let states = 1usize << m;
        let mut next = vec![0u16; states * 2];
        let mut out = vec![0u16; states * 2];
        let mask = (states - 1) as u32;
        for s in 0..states as u32 {
            for u in 0..2u32 {
                // w = u + sum_{i>=1} fb_i * w_{t-i}
                let mut w = u;
                for i in 1..=m {
                    w ^= (g.feedback >> i) & (s >> (i - 1)) & 1;
                }
                let mut v = (g.feedforward & 1) & w;
                for i in 1..=m {
                    v ^= (g.feedforward >> i) & (s >> (i - 1)) & 1;
                }
                let ns = ((s << 1) & mask) | w;
                next[(s as usize) << 1 | u as usize] = ns as u16;
                out[(s as usize) << 1 | u as usize] = v as u16;
            }
        }
        // Tail rule: cancel the feedback so a zero shifts in each step.
        // This is linear in the state, which keeps zero-tail codes linear.
        let mut tail_step = vec![0u16; states];
        for (s, t) in tail_step.iter_mut().enumerate() {
            let mut u = 0u32;
            for i in 1..=m {
                u ^= (g.feedback >> i) & ((s as u32) >> (i - 1)) & 1;
            }
            *t = u as u16;
        }
        Ok(Trellis {
            memory: m,
            input_arity: 1,
            state_count: states,
            next,
            out,
            tail_step,
            tail_len: m as usize,
            gens: vec![g],
        })
    }

    /// Observer canonical form for a two-input encoder with shared feedback.
    fn build_observer(gens: [RationalGenerator; 2]) -> Result<Self> {
        let fb = gens[0].feedback;
        let m = gens[0].memory().max(gens[1].memory());
        if m == 0 {
            return Err(Error::InvalidGenerator(String::from(
                "memoryless generator; nothing to build a trellis from",
            )));
        }
        let states = 1usize << m;
        let mut next = vec![0u16; states * 4];
        let mut out = vec![0u16; states * 4];
        for s in 0..states as u32 {
            for u in 0..4u32 {
                let mut v = s & 1;
                for (j, g) in gens.iter().enumerate() {
                    v ^= (g.feedforward & 1) & (u >> j) & 1;
                }
                let mut ns = s >> 1;
                for i in 1..=m {
                    let mut bit = (fb >> i) & v & 1;
                    for (j, g) in gens.iter().enumerate() {
                        bit ^= (g.feedforward >> i) & (u >> j) & 1;
                    }
                    ns ^= bit << (i - 1);
                }
                next[(s as usize) << 2 | u as usize] = ns as u16;
                out[(s as usize) << 2 | u as usize] = v as u16;
            }
        }
        let (tail_step, tail_len) = tail_by_search(&next, states, 2)?;
        if tail_len > m as usize {
            return Err(Error::InvalidGenerator(format!(
                "zero tail needs {tail_len} sections but the memory is only {m}",
            )));
        }
        Ok(Trellis {
            memory: m,
            input_arity: 2,
            state_count: states,
            next,
            out,
            tail_step,
            tail_len,
            gens: gens.to_vec(),
        })
    }

    pub fn memory(&self) -> u32 {
        self.memory
    }

    /// Input bits consumed per section.
    pub fn input_arity(&self) -> usize {
        self.input_arity
    }

    /// Parity bits emitted per section (always one).
    pub fn output_arity(&self) -> usize {
        1
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn generators(&self) -> &[RationalGenerator] {
        &self.gens
    }

    /// Number of tail sections a zero-tail termination appends.
    pub fn tail_len(&self) -> usize {
        self.tail_len
    }

    /// The tail input symbol prescribed for `state`.
    pub fn tail_step(&self, state: usize) -> usize {
        usize::from(self.tail_step[state])
    }

    /// One section: returns `(next_state, parity_bit)`.
    #[inline]
    pub fn step(&self, state: usize, symbol: usize) -> (usize, usize) {
        let idx = (state << self.input_arity) | symbol;
        (usize::from(self.next[idx]), usize::from(self.out[idx]))
    }

    /// Encodes `inputs` (flat, `input_arity` bits per section, position 0
    /// first) from the zero state and returns the parity stream. Zero-tail
    /// termination appends `tail_len` extra parity bits.
    pub fn encode(&self, inputs: &[bool], term: Termination) -> Result<Vec<bool>> {
        if !inputs.len().is_multiple_of(self.input_arity) {
            return Err(Error::InvalidInput(format!(
                "input length {} is not a multiple of the input arity {}",
                inputs.len(),
                self.input_arity
            )));
        }
        let sections = inputs.len() / self.input_arity;
        let mut parity = Vec::with_capacity(sections + self.tail_len);
        let mut s = 0usize;
        for t in 0..sections {
            let mut sym = 0usize;
            for p in 0..self.input_arity {
                sym |= usize::from(inputs[t * self.input_arity + p]) << p;
            }
            let (ns, v) = self.step(s, sym);
            parity.push(v != 0);
            s = ns;
        }
        if let Termination::ZeroTail = term {
            for _ in 0..self.tail_len {
                let sym = self.tail_step(s);
                let (ns, v) = self.step(s, sym);
                parity.push(v != 0);
                s = ns;
            }
            debug_assert_eq!(s, 0, "zero tail must end in the zero state");
        }
        Ok(parity)
    }

    /// Time-reversed trellis: transition `s -> s'` on `(symbol, parity)`
    /// becomes `s' -> s` with the same labels. Exists only when the state
    /// update is invertible for each fixed input symbol (true whenever the
    /// feedback polynomial has full degree). Generator metadata is carried
    /// over unchanged for reference.
    pub fn reversed(&self) -> Result<Trellis> {
        let symbols = 1usize << self.input_arity;
        let mut next = vec![u16::MAX; self.state_count * symbols];
        let mut out = vec![0u16; self.state_count * symbols];
        for s in 0..self.state_count {
            for u in 0..symbols {
                let (ns, v) = self.step(s, u);
                let idx = ns << self.input_arity | u;
                if next[idx] != u16::MAX {
                    return Err(Error::InvalidInput(String::from(
                        "state map is not invertible; no time reversal exists",
                    )));
                }
                next[idx] = s as u16;
                out[idx] = v as u16;
            }
        }
        let (tail_step, tail_len) = tail_by_search(&next, self.state_count, self.input_arity)?;
        Ok(Trellis {
            memory: self.memory,
            input_arity: self.input_arity,
            state_count: self.state_count,
            next,
            out,
            tail_step,
            tail_len,
            gens: self.gens.clone(),
        })
    }
}

/// Shortest-path tail rule: for every state, the input symbol starting a
/// minimum-length path to state zero (smallest symbol on ties). Returns the
/// per-state rule and the worst-case path length.
fn tail_by_search(next: &[u16], states: usize, arity: usize) -> Result<(Vec<u16>, usize)> {
    let symbols = 1usize << arity;
    let mut dist = vec![usize::MAX; states];
    let mut step = vec![0u16; states];
    dist[0] = 0;
    loop {
        let mut changed = false;
        for s in 0..states {
            for u in 0..symbols {
                let d = dist[usize::from(next[s << arity | u])];
                if d != usize::MAX && d + 1 < dist[s] {
                    dist[s] = d + 1;
                    step[s] = u as u16;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let worst = *dist.iter().max().unwrap();
    if worst == usize::MAX {
        return Err(Error::InvalidGenerator(String::from(
            "some state cannot reach the zero state; no zero tail exists",
        )));
    }
    Ok((step, worst))
}
