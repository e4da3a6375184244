//! Bit-packed linear algebra over F2.
//!
//! Vectors are row vectors; a matrix acts on them from the right.

use serde::{Deserialize, Serialize};
use std::fmt;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Dense bit vector over F2.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; words_for(len)], len }
    }

    #[must_use]
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.flip(i);
        }
        v
    }

    #[must_use]
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    #[must_use]
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[must_use]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[must_use]
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    #[must_use]
    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    #[must_use]
    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len, "length mismatch");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        BitVec { words, len: self.len }
    }

    /// Parity of the overlap.
    #[must_use]
    #[inline]
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    #[must_use]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + t)
            })
        })
    }

    #[must_use]
    pub fn first_one(&self) -> Option<usize> {
        self.iter_ones().next()
    }

    #[must_use]
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| u8::from(self.get(i))).collect()
    }

    /// Bits `[start, start + len)` as a new vector.
    #[must_use]
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.len);
        let mut out = BitVec::zeros(len);
        for i in self.iter_ones() {
            if i >= start && i < start + len {
                out.set(i - start, true);
            }
        }
        out
    }

    #[must_use]
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Keep only the listed positions, in order.
    #[must_use]
    pub fn select(&self, positions: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(positions.len());
        for (j, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.set(j, true);
            }
        }
        out
    }

    /// Image under the position map `i -> perm[i]`.
    #[must_use]
    pub fn permute(&self, perm: &[usize]) -> BitVec {
        assert_eq!(perm.len(), self.len);
        BitVec::from_indices(self.len, self.iter_ones().map(|i| perm[i]))
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for BitVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_bits().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(d)?;
        Ok(BitVec::from_bits(&bits))
    }
}

/// Dense matrix over F2 stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

/// Row-reduced echelon form together with the row transform that produced it.
#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: BitMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
    /// `transform * input == reduced`.
    pub transform: BitMatrix,
}

impl BitMatrix {
    #[must_use]
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows: vec![BitVec::zeros(cols); rows], cols }
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|i| BitVec::unit(n, i)).collect(), cols: n }
    }

    #[must_use]
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        Self { rows, cols }
    }

    #[must_use]
    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(cols, rows.iter().map(|r| BitVec::from_bits(r)).collect())
    }

    #[must_use]
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(BitVec::to_bits).collect()
    }

    #[must_use]
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    #[must_use]
    pub fn num_cols(&self) -> usize {
        self.cols
    }

    #[must_use]
    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    #[must_use]
    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut BitVec {
        &mut self.rows[i]
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.rows.push(row);
    }

    #[must_use]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVec::is_zero)
    }

    #[must_use]
    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter_ones() {
                out.rows[c].set(r, true);
            }
        }
        out
    }

    /// `v * self`.
    #[must_use]
    pub fn left_mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.rows.len(), "dimension mismatch");
        let mut out = BitVec::zeros(self.cols);
        for i in v.iter_ones() {
            out.xor_assign(&self.rows[i]);
        }
        out
    }

    /// `self * v^T` as a vector indexed by rows.
    #[must_use]
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = BitVec::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(v) {
                out.set(i, true);
            }
        }
        out
    }

    #[must_use]
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows.len(), "dimension mismatch");
        BitMatrix {
            rows: self.rows.iter().map(|r| other.left_mul_vec(r)).collect(),
            cols: other.cols,
        }
    }

    #[must_use]
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column mismatch");
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        BitMatrix { rows, cols: self.cols }
    }

    #[must_use]
    pub fn hstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows.len(), other.rows.len(), "row mismatch");
        BitMatrix {
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a.concat(b)).collect(),
            cols: self.cols + other.cols,
        }
    }

    #[must_use]
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        BitMatrix { rows: self.rows.iter().map(|r| r.select(cols)).collect(), cols: cols.len() }
    }

    #[must_use]
    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        BitMatrix { rows: rows.iter().map(|&i| self.rows[i].clone()).collect(), cols: self.cols }
    }

    #[must_use]
    pub fn rref(&self) -> Rref {
        let m = self.rows.len();
        let mut a = self.rows.clone();
        let mut t: Vec<BitVec> = (0..m).map(|i| BitVec::unit(m, i)).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| a[i].get(c)) else { continue };
            a.swap(r, p);
            t.swap(r, p);
            let (pa, pt) = (a[r].clone(), t[r].clone());
            for i in 0..m {
                if i != r && a[i].get(c) {
                    a[i].xor_assign(&pa);
                    t[i].xor_assign(&pt);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref {
            reduced: BitMatrix { rows: a, cols: self.cols },
            rank: r,
            pivots,
            transform: BitMatrix { rows: t, cols: m },
        }
    }

    /// Rank without tracking the transform.
    #[must_use]
    pub fn rank(&self) -> usize {
        let mut a = self.rows.clone();
        let m = a.len();
        let mut r = 0;
        for c in 0..self.cols {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| a[i].get(c)) else { continue };
            a.swap(r, p);
            let pa = a[r].clone();
            for row in a.iter_mut().skip(r + 1) {
                if row.get(c) {
                    row.xor_assign(&pa);
                }
            }
            r += 1;
        }
        r
    }

    /// Basis of `{x : self * x^T = 0}`.
    #[must_use]
    pub fn kernel(&self) -> BitMatrix {
        let rr = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &rr.pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::unit(self.cols, f);
            for (r, &p) in rr.pivots.iter().enumerate() {
                if rr.reduced.rows[r].get(f) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        BitMatrix { rows: basis, cols: self.cols }
    }

    /// Linearly independent rows spanning the same space.
    #[must_use]
    pub fn row_basis(&self) -> BitMatrix {
        let rr = self.rref();
        BitMatrix { rows: rr.reduced.rows[..rr.rank].to_vec(), cols: self.cols }
    }

    #[must_use]
    pub fn row_span_equal(&self, other: &BitMatrix) -> bool {
        assert_eq!(self.cols, other.cols, "column mismatch");
        let r = self.rank();
        r == other.rank() && self.vstack(other).rank() == r
    }

    /// Coefficients `c` with `c * self == target`, if any.
    #[must_use]
    pub fn solve_left(&self, target: &BitVec) -> Option<BitVec> {
        Reducer::new(self).express(target)
    }

    #[must_use]
    pub fn in_row_span(&self, v: &BitVec) -> bool {
        Reducer::new(self).reduce(v).is_zero()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

impl Serialize for BitMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            cols: usize,
            rows: &'a [BitVec],
        }
        Raw { cols: self.cols, rows: &self.rows }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            cols: usize,
            rows: Vec<BitVec>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.rows.iter().any(|r| r.len() != raw.cols) {
            return Err(serde::de::Error::custom("row length mismatch"));
        }
        Ok(BitMatrix { rows: raw.rows, cols: raw.cols })
    }
}

/// Cached echelon basis for repeated span membership queries.
#[derive(Clone, Debug)]
pub struct Reducer {
    basis: Vec<BitVec>,
    pivots: Vec<usize>,
    coeffs: Vec<BitVec>,
    nrows: usize,
}

impl Reducer {
    #[must_use]
    pub fn new(m: &BitMatrix) -> Self {
        let rr = m.rref();
        Self {
            basis: rr.reduced.rows[..rr.rank].to_vec(),
            pivots: rr.pivots,
            coeffs: rr.transform.rows[..rr.rank].to_vec(),
            nrows: m.num_rows(),
        }
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    #[must_use]
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(b);
            }
        }
        v
    }

    #[must_use]
    pub fn express(&self, v: &BitVec) -> Option<BitVec> {
        let mut v = v.clone();
        let mut c = BitVec::zeros(self.nrows);
        for ((b, &p), t) in self.basis.iter().zip(&self.pivots).zip(&self.coeffs) {
            if v.get(p) {
                v.xor_assign(b);
                c.xor_assign(t);
            }
        }
        v.is_zero().then_some(c)
    }
}

/// Echelon basis grown one vector at a time.
#[derive(Clone, Debug, Default)]
pub struct IncrementalBasis {
    rows: Vec<(usize, BitVec)>,
}

impl IncrementalBasis {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn from_matrix(m: &BitMatrix) -> Self {
        let mut b = Self::new();
        for r in m.rows() {
            b.insert(r);
        }
        b
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    #[must_use]
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        for (p, r) in &self.rows {
            if v.get(*p) {
                v.xor_assign(r);
            }
        }
        v
    }

    /// Adds `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v);
        match r.first_one() {
            None => false,
            Some(p) => {
                for (_, row) in &mut self.rows {
                    if row.get(p) {
                        row.xor_assign(&r);
                    }
                }
                self.rows.push((p, r));
                true
            }
        }
    }

    #[must_use]
    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }
}

/// The symplectic form on `F2^{2n}`: X half first, Z half second.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticForm {
    pub n: usize,
}

impl SymplecticForm {
    #[must_use]
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// `v * J`, i.e. swap the X and Z halves.
    #[must_use]
    pub fn apply(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), 2 * self.n, "dimension mismatch");
        let mut out = BitVec::zeros(2 * self.n);
        for i in v.iter_ones() {
            out.set(if i < self.n { i + self.n } else { i - self.n }, true);
        }
        out
    }

    /// `m * J`.
    #[must_use]
    pub fn apply_rows(&self, m: &BitMatrix) -> BitMatrix {
        BitMatrix::from_rows(2 * self.n, m.rows().iter().map(|r| self.apply(r)).collect())
    }

    #[must_use]
    pub fn matrix(&self) -> BitMatrix {
        self.apply_rows(&BitMatrix::identity(2 * self.n))
    }

    #[must_use]
    pub fn product(&self, u: &BitVec, v: &BitVec) -> bool {
        u.dot(&self.apply(v))
    }
}

/// `u J v^T` for Pauli vectors of length `2n`.
#[must_use]
pub fn symplectic_product(u: &BitVec, v: &BitVec) -> bool {
    assert_eq!(u.len(), v.len(), "length mismatch");
    assert!(u.len() % 2 == 0, "odd Pauli vector length");
    SymplecticForm::new(u.len() / 2).product(u, v)
}

/// Matrix of pairwise symplectic products `a J b^T`.
#[must_use]
pub fn symplectic_gram(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(a.num_cols(), b.num_cols());
    let form = SymplecticForm::new(a.num_cols() / 2);
    let bj = form.apply_rows(b);
    a.mul(&bj.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_small() {
        let m = BitMatrix::from_dense(&[vec![1, 1], vec![1, 1]]);
        let rr = m.rref();
        assert_eq!(rr.rank, 1);
        assert_eq!(rr.reduced.to_dense(), vec![vec![1, 1], vec![0, 0]]);
        assert_eq!(rr.transform.mul(&m), rr.reduced);
    }

    #[test]
    fn kernel_of_single_row() {
        let k = BitMatrix::from_dense(&[vec![1, 1, 0]]).kernel();
        assert_eq!(k.num_rows(), 2);
        let expected = BitMatrix::from_dense(&[vec![1, 1, 0], vec![0, 0, 1]]);
        assert!(k.row_span_equal(&expected));
    }

    #[test]
    fn y_anticommutes_with_z() {
        let y = BitVec::from_bits(&[1, 1]);
        let z = BitVec::from_bits(&[0, 1]);
        assert!(symplectic_product(&y, &z));
        assert!(!symplectic_product(&y, &y));
    }

    #[test]
    fn span_equality_ignores_basis() {
        let a = BitMatrix::from_dense(&[vec![1, 0, 1], vec![0, 1, 1]]);
        let b = BitMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]);
        assert!(a.row_span_equal(&b));
        let c = BitMatrix::from_dense(&[vec![1, 0, 0], vec![0, 1, 1]]);
        assert!(!a.row_span_equal(&c));
    }

    #[test]
    fn solve_left_roundtrip() {
        let a = BitMatrix::from_dense(&[vec![1, 0, 1, 1], vec![0, 1, 1, 0], vec![1, 1, 0, 1]]);
        let target = a.row(0).xor(a.row(1));
        let c = a.solve_left(&target).unwrap();
        assert_eq!(a.left_mul_vec(&c), target);
        assert!(a.solve_left(&BitVec::from_bits(&[0, 0, 0, 1])).is_none());
    }

    #[test]
    fn slices_and_concat() {
        let v = BitVec::from_indices(130, [0, 64, 65, 129]);
        assert_eq!(v.weight(), 4);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 64, 65, 129]);
        let s = v.slice(64, 66);
        assert_eq!(s.iter_ones().collect::<Vec<_>>(), vec![0, 1, 65]);
        let c = s.concat(&v.slice(0, 1));
        assert_eq!(c.iter_ones().collect::<Vec<_>>(), vec![0, 1, 65, 66]);
    }
}
