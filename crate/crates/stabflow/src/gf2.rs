//! Dense linear algebra over GF(2).
//!
//! Vectors are packed into `u64` words with bits past `len` kept at zero, so
//! equality and hashing work directly on the word storage.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Errors raised by GF(2) routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A packed vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    /// All-zero vector of length `len`.
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// All-one vector of length `len`.
    #[must_use]
    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    /// Vector with ones exactly at `indices`.
    ///
    /// # Panics
    ///
    /// Panics if an index is `>= len`.
    #[must_use]
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in indices {
            v.flip(i);
        }
        v
    }

    #[must_use]
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Build from the low `len` bits of a single word.
    ///
    /// # Panics
    ///
    /// Panics if `len > 64`.
    #[must_use]
    pub fn from_word(len: usize, word: u64) -> Self {
        assert!(len <= 64, "from_word supports at most 64 bits");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = word & mask;
        }
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

    /// # Panics
    ///
    /// Panics if `i >= len`.
    #[must_use]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// # Panics
    ///
    /// Panics if `i >= len`.
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// # Panics
    ///
    /// Panics if `i >= len`.
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Hamming weight.
    #[must_use]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// # Panics
    ///
    /// Panics on length mismatch.
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// # Panics
    ///
    /// Panics on length mismatch.
    #[must_use]
    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// # Panics
    ///
    /// Panics on length mismatch.
    #[must_use]
    pub fn and(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "and of vectors with different lengths");
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
            len: self.len,
        }
    }

    /// # Panics
    ///
    /// Panics on length mismatch.
    #[must_use]
    pub fn or(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "or of vectors with different lengths");
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
            len: self.len,
        }
    }

    /// Inner product mod 2.
    ///
    /// # Panics
    ///
    /// Panics on length mismatch.
    #[must_use]
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    /// Indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Concatenate `self` and `other`.
    #[must_use]
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Bits `start..end` as a new vector.
    ///
    /// # Panics
    ///
    /// Panics if the range is out of bounds.
    #[must_use]
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len, "slice out of range");
        let mut out = Self::zeros(end - start);
        for i in self.iter_ones() {
            if i >= start && i < end {
                out.set(i - start, true);
            }
        }
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, ")")
    }
}

/// A GF(2) matrix stored as packed rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: Vec<BitVector>,
    cols: usize,
}

impl BitMatrix {
    #[must_use]
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitVector::zeros(cols); rows],
            cols,
        }
    }

    /// Build from explicit rows.
    ///
    /// # Errors
    ///
    /// Returns [`Gf2Error::DimensionMismatch`] if a row length differs from `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        for r in &rows {
            if r.len() != cols {
                return Err(Gf2Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Ok(Self { rows, cols })
    }

    /// Build from a 0/1 table.
    ///
    /// # Panics
    ///
    /// Panics if rows have unequal lengths.
    #[must_use]
    pub fn from_table(table: &[Vec<u8>]) -> Self {
        let cols = table.first().map_or(0, Vec::len);
        let rows = table
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged table");
                BitVector::from_bools(&r.iter().map(|&b| b != 0).collect::<Vec<_>>())
            })
            .collect();
        Self { rows, cols }
    }

    #[must_use]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[must_use]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[must_use]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    #[must_use]
    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    #[must_use]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    /// # Panics
    ///
    /// Panics if the row length differs from the column count.
    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.rows.push(row);
    }

    #[must_use]
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter_ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// `M v` for a column vector `v` of length `ncols`.
    ///
    /// # Panics
    ///
    /// Panics on length mismatch.
    #[must_use]
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols, "mul_vec length mismatch");
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        out
    }

    /// `xᵀ M` for a row-combination vector `x` of length `nrows`.
    ///
    /// # Panics
    ///
    /// Panics on length mismatch.
    #[must_use]
    pub fn combine_rows(&self, x: &BitVector) -> BitVector {
        assert_eq!(x.len(), self.rows.len(), "combine_rows length mismatch");
        let mut out = BitVector::zeros(self.cols);
        for i in x.iter_ones() {
            out.xor_assign(&self.rows[i]);
        }
        out
    }

    /// Basis of the right kernel `{h : M h = 0}`.
    #[must_use]
    pub fn kernel(&self) -> Vec<BitVector> {
        let ech = Echelon::new(self);
        let pivot_set: Vec<Option<usize>> = {
            let mut p = vec![None; self.cols];
            for (k, &c) in ech.pivot_cols.iter().enumerate() {
                p[c] = Some(k);
            }
            p
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut h = BitVector::zeros(self.cols);
            h.set(free, true);
            for (k, &pc) in ech.pivot_cols.iter().enumerate() {
                if ech.reduced[k].get(free) {
                    h.set(pc, true);
                }
            }
            basis.push(h);
        }
        basis
    }

    /// Whether `v` lies in the row space.
    ///
    /// # Panics
    ///
    /// Panics on length mismatch.
    #[must_use]
    pub fn row_space_contains(&self, v: &BitVector) -> bool {
        Echelon::new(self).reduce(v).is_zero()
    }
}

/// Fully reduced row echelon form with row-combination bookkeeping.
#[derive(Clone, Debug)]
pub struct Echelon {
    /// Nonzero reduced rows; row `k` has its leading one in `pivot_cols[k]`.
    pub reduced: Vec<BitVector>,
    /// Combination of original rows producing `reduced[k]`.
    pub combos: Vec<BitVector>,
    pub pivot_cols: Vec<usize>,
    /// Combinations of original rows summing to zero.
    pub null_combos: Vec<BitVector>,
}

impl Echelon {
    #[must_use]
    pub fn new(m: &BitMatrix) -> Self {
        let n = m.nrows();
        let mut rows: Vec<BitVector> = m.rows.clone();
        let mut combos: Vec<BitVector> = (0..n).map(|i| BitVector::from_indices(n, &[i])).collect();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..m.ncols() {
            let Some(p) = (r..n).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            combos.swap(r, p);
            for i in 0..n {
                if i != r && rows[i].get(c) {
                    let (src, src_c) = (rows[r].clone(), combos[r].clone());
                    rows[i].xor_assign(&src);
                    combos[i].xor_assign(&src_c);
                }
            }
            pivot_cols.push(c);
            r += 1;
            if r == n {
                break;
            }
        }
        let null_combos = combos.split_off(r);
        rows.truncate(r);
        Self {
            reduced: rows,
            combos,
            pivot_cols,
            null_combos,
        }
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    /// Remainder of `v` after eliminating pivot columns.
    #[must_use]
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut out = v.clone();
        for (k, &c) in self.pivot_cols.iter().enumerate() {
            if out.get(c) {
                out.xor_assign(&self.reduced[k]);
            }
        }
        out
    }

    /// Row combination `x` with `xᵀ M = v`, if one exists.
    #[must_use]
    pub fn express(&self, v: &BitVector, nrows: usize) -> Option<BitVector> {
        let mut rem = v.clone();
        let mut x = BitVector::zeros(nrows);
        for (k, &c) in self.pivot_cols.iter().enumerate() {
            if rem.get(c) {
                rem.xor_assign(&self.reduced[k]);
                x.xor_assign(&self.combos[k]);
            }
        }
        rem.is_zero().then_some(x)
    }
}

/// Rank over GF(2).
#[must_use]
pub fn rank(m: &BitMatrix) -> usize {
    Echelon::new(m).rank()
}

/// Solution set `particular + span(nullspace)` of `xᵀ A = bᵀ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: BitVector,
    pub nullspace: Vec<BitVector>,
}

/// Solve `xᵀ A = bᵀ` for `x` of length `A.nrows()`.
///
/// Returns `Ok(None)` when the system is inconsistent.
///
/// # Errors
///
/// Returns [`Gf2Error::DimensionMismatch`] if `b.len() != A.ncols()`.
pub fn solve_affine(a: &BitMatrix, b: &BitVector) -> Result<Option<AffineSolution>, Gf2Error> {
    check_len(a.ncols(), b.len())?;
    let ech = Echelon::new(a);
    Ok(ech.express(b, a.nrows()).map(|particular| AffineSolution {
        particular,
        nullspace: ech.null_combos.clone(),
    }))
}

/// Minimum-weight solution of a linear system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinSupport {
    pub weight: usize,
    pub solution: BitVector,
}

/// Nullity up to which the solution coset is enumerated exhaustively.
const COSET_ENUM_MAX_NULLITY: usize = 20;
/// Row count above which weight classes are searched meet-in-the-middle.
const MITM_ROW_THRESHOLD: usize = 24;

/// Exact minimum Hamming weight of `x` with `xᵀ A = bᵀ`.
///
/// Returns `Ok(None)` if the system is inconsistent or every solution has
/// weight above `cap`.
///
/// # Errors
///
/// Returns [`Gf2Error::DimensionMismatch`] if `b.len() != A.ncols()`.
pub fn min_support_solution(
    a: &BitMatrix,
    b: &BitVector,
    cap: usize,
) -> Result<Option<MinSupport>, Gf2Error> {
    let Some(sol) = solve_affine(a, b)? else {
        return Ok(None);
    };
    let best = if sol.nullspace.len() <= COSET_ENUM_MAX_NULLITY {
        min_weight_in_coset(&sol.particular, &sol.nullspace)
    } else {
        weight_class_search(a, b, cap)
    };
    Ok(best.filter(|m| m.weight <= cap))
}

/// Gray-code walk over `p + span(basis)`.
fn min_weight_in_coset(p: &BitVector, basis: &[BitVector]) -> Option<MinSupport> {
    let mut cur = p.clone();
    let mut best = MinSupport {
        weight: cur.weight(),
        solution: cur.clone(),
    };
    let total: u64 = 1u64 << basis.len();
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        cur.xor_assign(&basis[bit]);
        let w = cur.weight();
        if w < best.weight {
            best = MinSupport {
                weight: w,
                solution: cur.clone(),
            };
        }
    }
    Some(best)
}

/// Search row subsets by increasing size; the first hit is optimal.
fn weight_class_search(a: &BitMatrix, b: &BitVector, cap: usize) -> Option<MinSupport> {
    let n = a.nrows();
    if b.is_zero() {
        return Some(MinSupport {
            weight: 0,
            solution: BitVector::zeros(n),
        });
    }
    for w in 1..=cap.min(n) {
        let hit = if n <= MITM_ROW_THRESHOLD {
            let mut found = None;
            for_each_subset(n, w, |idx| {
                let mut acc = b.clone();
                for &i in idx {
                    acc.xor_assign(a.row(i));
                }
                if acc.is_zero() {
                    found = Some(idx.to_vec());
                    return false;
                }
                true
            });
            found
        } else {
            meet_in_middle(a, b, w)
        };
        if let Some(idx) = hit {
            return Some(MinSupport {
                weight: idx.len(),
                solution: BitVector::from_indices(n, &idx),
            });
        }
    }
    None
}

/// Find `w` rows XOR-ing to `b`, assuming no solution of smaller weight
/// exists. Under that assumption any collision is between disjoint halves.
fn meet_in_middle(a: &BitMatrix, b: &BitVector, w: usize) -> Option<Vec<usize>> {
    let n = a.nrows();
    let h2 = w / 2;
    let h1 = w - h2;
    let mut table: HashMap<BitVector, Vec<usize>> = HashMap::new();
    for_each_subset(n, h2, |idx| {
        let acc = xor_rows(a, idx);
        table.entry(acc).or_insert_with(|| idx.to_vec());
        true
    });
    let mut found = None;
    for_each_subset(n, h1, |idx| {
        let mut acc = xor_rows(a, idx);
        acc.xor_assign(b);
        if let Some(other) = table.get(&acc) {
            let mut all: Vec<usize> = idx.iter().chain(other).copied().collect();
            all.sort_unstable();
            all.dedup();
            if all.len() == w {
                found = Some(all);
                return false;
            }
        }
        true
    });
    found
}

fn xor_rows(a: &BitMatrix, idx: &[usize]) -> BitVector {
    let mut acc = BitVector::zeros(a.ncols());
    for &i in idx {
        acc.xor_assign(a.row(i));
    }
    acc
}

/// Visit every `k`-subset of `0..n` in lexicographic order until `f`
/// returns `false`.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Rank beyond which the row space is not enumerated directly.
const ROWSPACE_ENUM_MAX_RANK: usize = 22;

/// Exact minimum weight of `xᵀ G ⊕ c` over all `x`, excluding the zero
/// vector when `c = 0`.
///
/// Returns `Ok(None)` when no such vector has weight `<= w_max`, which
/// certifies the minimum is at least `w_max + 1`.
///
/// # Errors
///
/// Returns [`Gf2Error::DimensionMismatch`] if `coset.len() != G.ncols()`.
pub fn min_weight_codeword(
    gen: &BitMatrix,
    coset: &BitVector,
    w_max: usize,
) -> Result<Option<MinSupport>, Gf2Error> {
    check_len(gen.ncols(), coset.len())?;
    let n = gen.ncols();
    let ech = Echelon::new(gen);
    let r = ech.rank();
    let exclude_zero = coset.is_zero();
    let support_cost: f64 = (1..=w_max.min(n)).map(|w| binomial(n, w)).sum();
    let best = if r <= ROWSPACE_ENUM_MAX_RANK && ((1u64 << r) as f64) <= support_cost.max(1.0) {
        let mut cur = coset.clone();
        let mut best: Option<MinSupport> = None;
        let mut consider = |v: &BitVector| {
            if exclude_zero && v.is_zero() {
                return;
            }
            let w = v.weight();
            if best.as_ref().is_none_or(|b| w < b.weight) {
                best = Some(MinSupport {
                    weight: w,
                    solution: v.clone(),
                });
            }
        };
        consider(&cur);
        for step in 1..(1u64 << r) {
            let bit = step.trailing_zeros() as usize;
            cur.xor_assign(&ech.reduced[bit]);
            consider(&cur);
        }
        best
    } else {
        let start = if exclude_zero { 1 } else { 0 };
        let mut best = None;
        for w in start..=w_max.min(n) {
            for_each_subset(n, w, |idx| {
                let v = BitVector::from_indices(n, idx);
                if ech.reduce(&v.xor(coset)).is_zero() {
                    best = Some(MinSupport {
                        weight: w,
                        solution: v,
                    });
                    return false;
                }
                true
            });
            if best.is_some() {
                break;
            }
        }
        best
    };
    Ok(best.filter(|b| b.weight <= w_max))
}

#[must_use]
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_len(expected: usize, found: usize) -> Result<(), Gf2Error> {
    if expected == found {
        Ok(())
    } else {
        Err(Gf2Error::DimensionMismatch { expected, found })
    }
}
