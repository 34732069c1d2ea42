//! Interleavers: permutations of bit positions, stored in gather form.
//!
//! `out[i] = x[fwd[i]]` throughout. Structured interleavers for code
//! graphs are assembled from blocks with [`Perm::block_diagonal`] and
//! [`Perm::anti_diagonal`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perm {
    fwd: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            fwd: (0..n as u32).collect(),
        }
    }

    /// Wraps a gather map `out[i] = x[fwd[i]]`, checking it is a bijection.
    pub fn from_forward(fwd: Vec<u32>) -> Result<Self> {
        let n = fwd.len();
        let mut seen = vec![false; n];
        for &j in &fwd {
            let j = j as usize;
            if j >= n || seen[j] {
                return Err(Error::InvalidInput(format!(
                    "gather map of length {n} is not a permutation"
                )));
            }
            seen[j] = true;
        }
        Ok(Perm { fwd })
    }

    /// Uniformly random permutation (Fisher-Yates).
    pub fn uniform(n: usize, rng: &mut ChaCha12Rng) -> Self {
        let mut fwd: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            fwd.swap(i, rng::below(rng, i + 1));
        }
        Perm { fwd }
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    /// Source index feeding output position `i`.
    #[inline]
    pub fn src(&self, i: usize) -> usize {
        self.fwd[i] as usize
    }

    pub fn apply<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.fwd.len());
        self.fwd.iter().map(|&j| x[j as usize]).collect()
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.fwd.len()];
        for (i, &j) in self.fwd.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        Perm { fwd: inv }
    }

    /// `self` after `inner`: applying the result equals applying `inner`
    /// first and `self` on its output.
    pub fn compose(&self, inner: &Perm) -> Perm {
        assert_eq!(self.len(), inner.len());
        Perm {
            fwd: self.fwd.iter().map(|&j| inner.fwd[j as usize]).collect(),
        }
    }

    /// Block-diagonal permutation: block `k` permutes its own span.
    pub fn block_diagonal(blocks: &[&Perm]) -> Perm {
        let total: usize = blocks.iter().map(|b| b.len()).sum();
        let mut fwd = Vec::with_capacity(total);
        let mut off = 0u32;
        for b in blocks {
            fwd.extend(b.fwd.iter().map(|&j| off + j));
            off += b.len() as u32;
        }
        Perm { fwd }
    }

    /// Two equal-length blocks swapped crosswise: the upper half of the
    /// output reads the lower half of the input through `up`, and the
    /// lower half reads the upper half through `low`.
    pub fn anti_diagonal(up: &Perm, low: &Perm) -> Perm {
        assert_eq!(up.len(), low.len());
        let n = up.len() as u32;
        let mut fwd = Vec::with_capacity(2 * up.len());
        fwd.extend(up.fwd.iter().map(|&j| n + j));
        fwd.extend(low.fwd.iter().copied());
        Perm { fwd }
    }
}
