//! Dense GF(2) matrices, packed 64 columns to the word.
//!
//! Small sizes only (hundreds of rows): enough for inverting the wiring of
//! an encoder whose parity bits are defined implicitly. Row operations are
//! whole-word XORs, so Gauss-Jordan elimination costs rows^2 * stride word
//! ops.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, val: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        if val {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Flips one entry; handy when building a matrix as a sum of terms.
    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / 64] ^= 1 << (c % 64);
    }

    fn xor_rows(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let (a, b) = (dst * self.stride, src * self.stride);
        for k in 0..self.stride {
            let w = self.data[b + k];
            self.data[a + k] ^= w;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.stride {
            self.data.swap(a * self.stride + k, b * self.stride + k);
        }
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[bool]) -> Vec<bool> {
        assert_eq!(x.len(), self.cols);
        let mut xw = vec![0u64; self.stride];
        for (c, &b) in x.iter().enumerate() {
            if b {
                xw[c / 64] |= 1 << (c % 64);
            }
        }
        let mut y = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut acc = 0u64;
            for k in 0..self.stride {
                acc ^= self.data[r * self.stride + k] & xw[k];
            }
            y.push(acc.count_ones() & 1 == 1);
        }
        y
    }

    /// C = self * rhs. Row i of C is the XOR of the rhs rows selected by
    /// the set bits of row i of self.
    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    let (a, b) = (r * out.stride, c * rhs.stride);
                    for k in 0..out.stride {
                        out.data[a + k] ^= rhs.data[b + k];
                    }
                }
            }
        }
        out
    }

    /// Inverse of a square matrix by Gauss-Jordan on the augmented
    /// identity; `None` when singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = BitMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col))?;
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            for r in 0..n {
                if r != col && a.get(r, col) {
                    a.xor_rows(r, col);
                    inv.xor_rows(r, col);
                }
            }
        }
        Some(inv)
    }
}
