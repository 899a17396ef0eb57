//! GF(2) vectors and matrices for the bit-level channel.
//!
//! Index 0 is the top signal level (the most significant bit, the one a
//! receiver with gain 1 sees). The down-shift matrix `S = shift(n, 1)`
//! moves every level one step down: `(S x)[i] = x[i-1]`, the bottom level
//! falls off and the top fills with zero. A receiver of gain `g` on an
//! `n`-level input observes `shift(n, n-g) x`, i.e. the top `g` levels.
//!
//! Rows are stored as single `u64` words (column `j` = bit `j`), which caps
//! dimensions at 64. Every system in this crate is far below that.

use crate::{Error, Result};

pub const MAX_BITS: usize = 64;

fn mask(len: usize) -> u64 {
    debug_assert!(len <= MAX_BITS);
    if len == MAX_BITS {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// A length-`len` vector over GF(2). Level `i` lives in bit `i` of `bits`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: u64,
    len: usize,
}

impl BitVector {
    pub fn zero(len: usize) -> BitVector {
        assert!(len <= MAX_BITS);
        BitVector { bits: 0, len }
    }

    /// Build from raw bits; anything above `len` is masked off.
    pub fn from_bits(bits: u64, len: usize) -> BitVector {
        assert!(len <= MAX_BITS);
        BitVector {
            bits: bits & mask(len),
            len,
        }
    }

    pub fn from_levels(levels: &[u8]) -> BitVector {
        assert!(levels.len() <= MAX_BITS);
        let mut bits = 0u64;
        for (i, &b) in levels.iter().enumerate() {
            if b != 0 {
                bits |= 1 << i;
            }
        }
        BitVector {
            bits,
            len: levels.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.bits >> i & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len);
        if v {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len);
        BitVector {
            bits: self.bits ^ other.bits,
            len: self.len,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Hex rendering with level 0 as the most significant digit, for traces.
    pub fn hex(&self) -> String {
        let digits = self.len.div_ceil(4).max(1);
        let mut rev = 0u64;
        for i in 0..self.len {
            if self.get(i) {
                rev |= 1 << (digits * 4 - 1 - i);
            }
        }
        format!("{rev:0width$x}", width = digits)
    }
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// Row-major GF(2) matrix; row `i` is one word, column `j` is bit `j`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> BitMatrix {
        assert!(cols <= MAX_BITS);
        BitMatrix {
            rows,
            cols,
            data: vec![0; rows],
        }
    }

    pub fn identity(n: usize) -> BitMatrix {
        let mut m = BitMatrix::zero(n, n);
        for i in 0..n {
            m.data[i] = 1 << i;
        }
        m
    }

    /// The down-shift map on `n` levels: output level `i` reads input level
    /// `i - k`. For `k >= n` every input falls off and the map is zero.
    pub fn shift(n: usize, k: usize) -> BitMatrix {
        let mut m = BitMatrix::zero(n, n);
        if k < n {
            for i in k..n {
                m.data[i] = 1 << (i - k);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        self.data[i] >> j & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        assert!(i < self.rows && j < self.cols);
        if v {
            self.data[i] |= 1 << j;
        } else {
            self.data[i] &= !(1 << j);
        }
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector::from_bits(self.data[i], self.cols)
    }

    pub fn mul_vec(&self, x: &BitVector) -> BitVector {
        assert_eq!(self.cols, x.len());
        let mut out = 0u64;
        for i in 0..self.rows {
            out |= u64::from((self.data[i] & x.bits()).count_ones() & 1) << i;
        }
        BitVector::from_bits(out, self.rows)
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = BitMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            let mut acc = 0u64;
            let mut row = self.data[i];
            while row != 0 {
                let k = row.trailing_zeros() as usize;
                acc ^= other.data[k];
                row &= row - 1;
            }
            out.data[i] = acc;
        }
        out
    }

    pub fn xor(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a ^ b)
            .collect();
        BitMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Stack `[self; below]`.
    pub fn vstack(&self, below: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, below.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        BitMatrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        }
    }

    /// Concatenate `[self | right]`.
    pub fn hstack(&self, right: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, right.rows);
        assert!(self.cols + right.cols <= MAX_BITS);
        let data = self
            .data
            .iter()
            .zip(&right.data)
            .map(|(a, b)| a | b << self.cols)
            .collect();
        BitMatrix {
            rows: self.rows,
            cols: self.cols + right.cols,
            data,
        }
    }

    /// Place `block` with its top-left corner at `(i, j)`.
    pub fn set_block(&mut self, i: usize, j: usize, block: &BitMatrix) {
        assert!(i + block.rows <= self.rows && j + block.cols <= self.cols);
        for r in 0..block.rows {
            self.data[i + r] |= block.data[r] << j;
        }
    }

    pub fn rank(&self) -> usize {
        let mut rows: Vec<u64> = self.data.iter().copied().filter(|&r| r != 0).collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let bit = 1u64 << col;
            let Some(p) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && *row & bit != 0 {
                    *row ^= pivot;
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// One solution of `A x = b`, free variables forced to zero.
    pub fn solve(&self, b: &BitVector) -> Option<BitVector> {
        self.solve_with_nullspace(b).map(|(x, _)| x)
    }

    /// A particular solution together with a basis of the solution space
    /// direction, or `None` when the system is inconsistent. The particular
    /// solution sets every free variable to zero.
    pub fn solve_with_nullspace(&self, b: &BitVector) -> Option<(BitVector, Vec<BitVector>)> {
        assert_eq!(self.rows, b.len());
        // Augmented rows: [A | b] with b in bit position `cols`.
        assert!(self.cols < MAX_BITS);
        let aug = 1u64 << self.cols;
        let mut rows: Vec<u64> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &r)| r | if b.get(i) { aug } else { 0 })
            .collect();
        let mut pivot_col = Vec::new();
        let mut rank = 0;
        for col in 0..self.cols {
            let bit = 1u64 << col;
            let Some(p) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && *row & bit != 0 {
                    *row ^= pivot;
                }
            }
            pivot_col.push(col);
            rank += 1;
        }
        if rows[rank..].iter().any(|&r| r & aug != 0) {
            return None;
        }

        let mut x = BitVector::zero(self.cols);
        for (r, &col) in pivot_col.iter().enumerate() {
            if rows[r] & aug != 0 {
                x.set(col, true);
            }
        }

        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &c in &pivot_col {
                v[c] = true;
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut n = BitVector::zero(self.cols);
            n.set(free, true);
            for (r, &col) in pivot_col.iter().enumerate() {
                if rows[r] >> free & 1 == 1 {
                    n.set(col, true);
                }
            }
            basis.push(n);
        }
        Some((x, basis))
    }

    /// Inverse of a square invertible matrix.
    pub fn inverse(&self) -> Result<BitMatrix> {
        if self.rows != self.cols {
            return Err(Error::InvalidParam("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut inv = BitMatrix::zero(n, n);
        for j in 0..n {
            let mut e = BitVector::zero(n);
            e.set(j, true);
            let (x, basis) = self
                .solve_with_nullspace(&e)
                .ok_or(Error::SingularChannel)?;
            if !basis.is_empty() {
                return Err(Error::SingularChannel);
            }
            for i in 0..n {
                if x.get(i) {
                    inv.set(i, j, true);
                }
            }
        }
        Ok(inv)
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            writeln!(f, "{:?}", self.row(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_moves_levels_down() {
        let s = BitMatrix::shift(4, 1);
        let x = BitVector::from_levels(&[1, 0, 1, 1]);
        assert_eq!(s.mul_vec(&x), BitVector::from_levels(&[0, 1, 0, 1]));
        assert_eq!(BitMatrix::shift(3, 0), BitMatrix::identity(3));
        assert_eq!(BitMatrix::shift(3, 5), BitMatrix::zero(3, 3));
        assert_eq!(BitMatrix::shift(3, 3), BitMatrix::zero(3, 3));
    }

    #[test]
    fn rank_of_shift() {
        assert_eq!(BitMatrix::shift(5, 2).rank(), 3);
        assert_eq!(BitMatrix::identity(6).rank(), 6);
        assert_eq!(BitMatrix::zero(4, 4).rank(), 0);
    }

    #[test]
    fn solve_simple() {
        // x0 + x1 = 1, x1 = 0
        let mut a = BitMatrix::zero(2, 2);
        a.set(0, 0, true);
        a.set(0, 1, true);
        a.set(1, 1, true);
        let b = BitVector::from_levels(&[1, 0]);
        let x = a.solve(&b).unwrap();
        assert_eq!(x, BitVector::from_levels(&[1, 0]));
        assert_eq!(a.mul_vec(&x), b);
    }

    #[test]
    fn solve_inconsistent() {
        // x0 = 0 and x0 = 1
        let mut a = BitMatrix::zero(2, 1);
        a.set(0, 0, true);
        a.set(1, 0, true);
        let b = BitVector::from_levels(&[0, 1]);
        assert!(a.solve(&b).is_none());
    }

    #[test]
    fn free_variables_are_zeroed() {
        // Single equation x0 + x2 = 1 in three unknowns.
        let mut a = BitMatrix::zero(1, 3);
        a.set(0, 0, true);
        a.set(0, 2, true);
        let b = BitVector::from_levels(&[1]);
        let (x, ns) = a.solve_with_nullspace(&b).unwrap();
        assert_eq!(x, BitVector::from_levels(&[1, 0, 0]));
        assert_eq!(ns.len(), 2);
        for n in &ns {
            assert!(a.mul_vec(&x.xor(n)) == b);
        }
    }

    #[test]
    fn hex_uses_top_level_first() {
        let x = BitVector::from_levels(&[1, 0, 1, 1, 0, 1]);
        // levels 101101 -> 0b1011 0b01xx -> 0xb4
        assert_eq!(x.hex(), "b4");
        assert_eq!(BitVector::zero(3).hex(), "0");
    }

    #[test]
    fn inverse_roundtrip() {
        // [[1,1],[0,1]] is its own inverse over GF(2).
        let mut a = BitMatrix::zero(2, 2);
        a.set(0, 0, true);
        a.set(0, 1, true);
        a.set(1, 1, true);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), BitMatrix::identity(2));
        assert!(BitMatrix::shift(3, 1).inverse().is_err());
    }
}
