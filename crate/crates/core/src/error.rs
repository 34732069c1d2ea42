//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by construction, analysis, and codec routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A generator polynomial, or a combination of generator polynomials,
    /// that cannot describe a realizable recursive encoder.
    InvalidGenerator(String),
    /// An argument violated a documented precondition.
    InvalidInput(String),
    /// An input slice had the wrong length for the operation.
    LengthMismatch { expected: usize, got: usize },
    /// An iterative solver hit its iteration cap before reaching tolerance.
    NonConvergence { iterations: u64 },
    /// The feedback linear system of a concrete code is singular for the
    /// permutations drawn from this seed.
    SingularFeedback { seed: u64 },
    /// Decoder messages contradicted each other. On an erasure channel a
    /// contradiction can only come from a wiring bug, never from channel
    /// noise, so it gets its own fatal variant instead of being folded
    /// into a decoding failure.
    Inconsistency(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGenerator(msg) => write!(f, "invalid generator: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::NonConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
            Error::SingularFeedback { seed } => {
                write!(f, "feedback system is singular for seed {seed}")
            }
            Error::Inconsistency(msg) => write!(f, "internal inconsistency: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
