//! Self-concatenated turbo-like code ensembles on the binary erasure
//! channel.
//!
//! The crate covers the full pipeline from a component convolutional
//! encoder to finite-length performance: trellis construction, exact
//! erasure transfer functions of the windowed MAP decoder, compact code
//! graphs tying several trellis segments together through interleavers,
//! density evolution with belief-propagation and MAP threshold solvers,
//! and a concrete codec (encoder plus iterative erasure decoder) for
//! simulation.
//!
//! `no_std` with `alloc`; the `serde` feature derives serializers for the
//! plain-data types so a host application can persist configurations and
//! results.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod codec;
pub mod de;
pub mod error;
pub mod gf2;
pub mod graph;
pub mod perm;
pub mod rng;
pub mod sim;
pub mod transfer;
pub mod trellis;

pub use error::{Error, Result};
