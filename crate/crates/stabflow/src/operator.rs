//! Weighted Pauli sums on up to 64 qubits and their dense matrices.
//!
//! A key `(x, z)` stands for the Hermitian string `i^{|x∧z|} X^x Z^z`, so a
//! qubit with both bits set carries `Y`. Qubit `i` is bit `i` of a basis
//! index, and `P|b⟩ = i^{|x∧z|} (−1)^{|z∧b|} |b ⊕ x⟩`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::pauli::PauliString;

pub type Key = (u64, u64);

/// `i^k`.
#[must_use]
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `(phase exponent, key)` with `P_a P_b = i^k P_{a·b}`.
#[must_use]
pub fn key_product(a: Key, b: Key) -> (u32, Key) {
    let (x, z) = (a.0 ^ b.0, a.1 ^ b.1);
    let k = (a.0 & a.1).count_ones() + (b.0 & b.1).count_ones() + 2 * (a.1 & b.0).count_ones() + 4 * 64
        - (x & z).count_ones();
    (k % 4, (x, z))
}

#[must_use]
pub fn keys_anticommute(a: Key, b: Key) -> bool {
    ((a.0 & b.1) ^ (a.1 & b.0)).count_ones() % 2 == 1
}

/// Sum of Pauli strings with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<Key, Complex64>,
}

impl PauliSum {
    /// # Panics
    ///
    /// Panics if `n > 64`.
    #[must_use]
    pub fn zero(n: usize) -> Self {
        assert!(n <= 64, "Pauli sums are limited to 64 qubits");
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        let mut s = Self::zero(n);
        s.add_term((0, 0), Complex64::new(1.0, 0.0));
        s
    }

    /// `coeff · p`, the sign of `p` folded into the coefficient.
    #[must_use]
    pub fn from_pauli(p: &PauliString, coeff: f64) -> Self {
        let mut s = Self::zero(p.n());
        s.add_pauli(p, coeff);
        s
    }

    pub fn add_pauli(&mut self, p: &PauliString, coeff: f64) {
        assert_eq!(p.n(), self.n, "qubit count mismatch");
        self.add_term(p.masks(), Complex64::new(coeff * f64::from(p.sign()), 0.0));
    }

    pub fn add_term(&mut self, key: Key, c: Complex64) {
        let e = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Key, Complex64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    #[must_use]
    pub fn coeff(&self, key: Key) -> Complex64 {
        self.terms.get(&key).copied().unwrap_or_default()
    }

    #[must_use]
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (k, v) in self.iter() {
            out.add_term(k, v * c);
        }
        out
    }

    #[must_use]
    pub fn scaled_re(&self, c: f64) -> Self {
        self.scaled(Complex64::new(c, 0.0))
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        for (k, v) in other.iter() {
            self.add_term(k, v);
        }
    }

    #[must_use]
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    #[must_use]
    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled_re(-1.0))
    }

    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        let mut out = Self::zero(self.n);
        for (ka, ca) in self.iter() {
            for (kb, cb) in other.iter() {
                let (ph, k) = key_product(ka, kb);
                out.add_term(k, ca * cb * i_pow(ph));
            }
        }
        out
    }

    /// `[self, other]`, computed from anticommuting pairs only.
    #[must_use]
    pub fn commutator(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        let mut out = Self::zero(self.n);
        for (ka, ca) in self.iter() {
            for (kb, cb) in other.iter() {
                if keys_anticommute(ka, kb) {
                    let (ph, k) = key_product(ka, kb);
                    out.add_term(k, ca * cb * i_pow(ph) * 2.0);
                }
            }
        }
        out
    }

    #[must_use]
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (k, v) in self.iter() {
            out.add_term(k, v.conj());
        }
        out
    }

    /// Drop coefficients with modulus at most `tol`.
    #[must_use]
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(k, c)| (*k, *c)).collect(),
        }
    }

    /// `Σ |c|`, an upper bound on the operator norm.
    #[must_use]
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, |a, b| a + b)
    }

    #[must_use]
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Union of the supports.
    #[must_use]
    pub fn support_mask(&self) -> u64 {
        self.terms.keys().fold(0, |acc, (x, z)| acc | x | z)
    }

    #[must_use]
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Dense `2^n × 2^n` matrix.
    ///
    /// # Panics
    ///
    /// Panics if `n > 14`.
    #[must_use]
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        assert!(self.n <= 14, "dense matrices are limited to 14 qubits");
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (k, c) in self.iter() {
            let base = c * i_pow((k.0 & k.1).count_ones());
            for b in 0..dim as u64 {
                let v = if (k.1 & b).count_ones() % 2 == 1 { -base } else { base };
                m[((b ^ k.0) as usize, b as usize)] += v;
            }
        }
        m
    }

    /// Real dense matrix; `None` if any entry has an imaginary part.
    #[must_use]
    pub fn to_dense_real(&self) -> Option<DMatrix<f64>> {
        let real = RealPauliOperator::new(self)?;
        assert!(self.n <= 14, "dense matrices are limited to 14 qubits");
        let dim = 1usize << self.n;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for b in 0..dim {
            m[(b, b)] = signed_sum(&real.diagonal, b as u64);
        }
        for (x, group) in &real.groups {
            for b in 0..dim as u64 {
                let mut s = 0.0;
                for &(z, c) in group {
                    s += if (z & b).count_ones() % 2 == 1 { -c } else { c };
                }
                m[((b ^ x) as usize, b as usize)] += s;
            }
        }
        Some(m)
    }

    /// Pauli expansion of a dense matrix, dropping coefficients with
    /// modulus at most `tol`.
    ///
    /// # Panics
    ///
    /// Panics if the matrix is not `2^n × 2^n`.
    #[must_use]
    pub fn from_dense(m: &DMatrix<Complex64>, n: usize, tol: f64) -> Self {
        let dim = 1usize << n;
        assert_eq!((m.nrows(), m.ncols()), (dim, dim), "matrix is not 2^n square");
        let scale = 1.0 / dim as f64;
        let rows: Vec<Vec<(Key, Complex64)>> = (0..dim as u64)
            .into_par_iter()
            .map(|x| {
                let mut w: Vec<Complex64> = (0..dim as u64).map(|b| m[((b ^ x) as usize, b as usize)]).collect();
                walsh_hadamard(&mut w);
                w.into_iter()
                    .enumerate()
                    .filter_map(|(z, v)| {
                        let z = z as u64;
                        let c = v * scale * i_pow(4 - (x & z).count_ones() % 4);
                        (c.norm() > tol).then_some(((x, z), c))
                    })
                    .collect()
            })
            .collect();
        let mut out = Self::zero(n);
        for (k, c) in rows.into_iter().flatten() {
            out.add_term(k, c);
        }
        out
    }
}

/// In-place unnormalized Walsh–Hadamard transform, `w[z] ← Σ_b (−1)^{z·b} w[b]`.
fn walsh_hadamard(w: &mut [Complex64]) {
    let mut h = 1;
    while h < w.len() {
        for i in (0..w.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (w[j], w[j + h]);
                w[j] = a + b;
                w[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// A Pauli sum with a real matrix, grouped by flip mask for fast
/// matrix-vector products.
#[derive(Clone, Debug)]
pub struct RealPauliOperator {
    n: usize,
    diagonal: Vec<(u64, f64)>,
    groups: Vec<(u64, Vec<(u64, f64)>)>,
}

impl RealPauliOperator {
    /// `None` when some matrix entry would be imaginary.
    #[must_use]
    pub fn new(sum: &PauliSum) -> Option<Self> {
        let mut by_x: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
        for (k, c) in sum.iter() {
            let c = c * i_pow((k.0 & k.1).count_ones());
            if c.im.abs() > 1e-14 * c.norm().max(1.0) {
                return None;
            }
            by_x.entry(k.0).or_default().push((k.1, c.re));
        }
        let diagonal = by_x.remove(&0).unwrap_or_default();
        Some(Self {
            n: sum.n(),
            diagonal,
            groups: by_x.into_iter().collect(),
        })
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// Diagonal of the matrix.
    #[must_use]
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim() as u64).into_par_iter().map(|r| signed_sum(&self.diagonal, r)).collect()
    }

    /// `y = M v`, with the precomputed diagonal `diag`.
    pub fn apply_with(&self, diag: &[f64], v: &[f64], y: &mut [f64]) {
        const CHUNK: usize = 1 << 12;
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, out)| {
            let base = (ci * CHUNK) as u64;
            for (i, o) in out.iter_mut().enumerate() {
                *o = diag[base as usize + i] * v[base as usize + i];
            }
            for (x, group) in &self.groups {
                for (i, o) in out.iter_mut().enumerate() {
                    let src = (base + i as u64) ^ x;
                    *o += signed_sum(group, src) * v[src as usize];
                }
            }
        });
    }
}

fn signed_sum(group: &[(u64, f64)], b: u64) -> f64 {
    group
        .iter()
        .map(|&(z, c)| c * (1.0 - f64::from(2 * ((z & b).count_ones() & 1))))
        .sum()
}

/// Largest entry modulus, or 1 for a zero matrix.
fn entry_scale<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    let s = m.iter().map(|c| c.clone().abs()).fold(0.0, f64::max);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Deterministic random orthogonal matrix, the Q factor of a random one.
fn random_rotation(n: usize, attempt: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ attempt);
    DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5).qr().q()
}

/// Implicit-QR solvers can stall on highly structured sparse input; the
/// normalized matrix is tried first, then random orthogonal similarities.
const EIGEN_ATTEMPTS: u64 = 4;

fn faer_real(m: &DMatrix<f64>, vectors: bool) -> Option<(Vec<f64>, Option<DMatrix<f64>>)> {
    let n = m.nrows();
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    if !vectors {
        return a.self_adjoint_eigenvalues(faer::Side::Lower).ok().map(|v| (v, None));
    }
    let eig = a.self_adjoint_eigen(faer::Side::Lower).ok()?;
    let s = eig.S().column_vector();
    let u = eig.U();
    Some(((0..n).map(|i| s[i]).collect(), Some(DMatrix::from_fn(n, n, |i, j| u[(i, j)]))))
}

fn real_decomposition(m: &DMatrix<f64>, vectors: bool) -> (Vec<f64>, Option<DMatrix<f64>>) {
    let scale = entry_scale(m);
    let a = m / scale;
    let rescale = |v: Vec<f64>| v.into_iter().map(|x| x * scale).collect::<Vec<_>>();
    if let Some((v, u)) = faer_real(&a, vectors) {
        return (rescale(v), u);
    }
    for attempt in 1..EIGEN_ATTEMPTS {
        let q = random_rotation(a.nrows(), attempt);
        let rotated = q.transpose() * &a * &q;
        let rotated = (&rotated + rotated.transpose()) * 0.5;
        if let Some((v, u)) = faer_real(&rotated, vectors) {
            return (rescale(v), u.map(|u| q * u));
        }
    }
    panic!("symmetric eigensolver did not converge after {EIGEN_ATTEMPTS} attempts");
}

/// Real symmetric decomposition, ascending.
///
/// # Panics
///
/// Panics if the eigensolver fails on every attempt.
#[must_use]
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (v, u) = real_decomposition(m, true);
    (v, u.expect("vectors requested"))
}

/// Real symmetric eigenvalues, ascending.
///
/// # Panics
///
/// Panics if the eigensolver fails on every attempt.
#[must_use]
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    real_decomposition(m, false).0
}

fn faer_complex(h: &DMatrix<Complex64>, vectors: bool) -> Option<(Vec<f64>, Option<DMatrix<Complex64>>)> {
    let n = h.nrows();
    let a = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| faer::c64::new(h[(i, j)].re, h[(i, j)].im));
    if !vectors {
        return a.self_adjoint_eigenvalues(faer::Side::Lower).ok().map(|v| (v, None));
    }
    let eig = a.self_adjoint_eigen(faer::Side::Lower).ok()?;
    let s = eig.S().column_vector();
    let u = eig.U();
    Some((
        (0..n).map(|i| s[i].re).collect(),
        Some(DMatrix::from_fn(n, n, |i, j| Complex64::new(u[(i, j)].re, u[(i, j)].im))),
    ))
}

fn complex_decomposition(h: &DMatrix<Complex64>, vectors: bool) -> (Vec<f64>, Option<DMatrix<Complex64>>) {
    let scale = entry_scale(h);
    let a = h.unscale(scale);
    let rescale = |v: Vec<f64>| v.into_iter().map(|x| x * scale).collect::<Vec<_>>();
    if let Some((v, u)) = faer_complex(&a, vectors) {
        return (rescale(v), u);
    }
    for attempt in 1..EIGEN_ATTEMPTS {
        let q = random_rotation(a.nrows(), attempt).map(|x| Complex64::new(x, 0.0));
        let rotated = q.adjoint() * &a * &q;
        let rotated = (&rotated + rotated.adjoint()).scale(0.5);
        if let Some((v, u)) = faer_complex(&rotated, vectors) {
            return (rescale(v), u.map(|u| q * u));
        }
    }
    panic!("Hermitian eigensolver did not converge after {EIGEN_ATTEMPTS} attempts");
}

fn real_part(m: &DMatrix<Complex64>) -> Option<DMatrix<f64>> {
    m.iter().all(|c| c.im == 0.0).then(|| m.map(|c| c.re))
}

#[derive(Clone, Debug)]
enum Basis {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// Eigen-decomposition of the Hermitian part of a matrix; real matrices
/// keep a real eigenbasis.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    values: Vec<f64>,
    basis: Basis,
}

impl HermitianEigen {
    /// # Panics
    ///
    /// Panics if the eigensolver fails to converge.
    #[must_use]
    pub fn new(m: &DMatrix<Complex64>) -> Self {
        let h = (m + m.adjoint()).scale(0.5);
        if let Some(r) = real_part(&h) {
            let (values, vectors) = symmetric_eigen(&r);
            return Self {
                values,
                basis: Basis::Real(vectors),
            };
        }
        let (values, vectors) = complex_decomposition(&h, true);
        Self {
            values,
            basis: Basis::Complex(vectors.expect("vectors requested")),
        }
    }

    /// Eigenvalues, ascending.
    #[must_use]
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `f(M)` for a real function `f`.
    #[must_use]
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        match &self.basis {
            Basis::Real(v) => {
                let mut scaled = v.clone();
                for (c, &l) in self.values.iter().enumerate() {
                    scaled.column_mut(c).scale_mut(f(l));
                }
                (scaled * v.transpose()).map(|x| Complex64::new(x, 0.0))
            }
            Basis::Complex(v) => {
                let mut scaled = v.clone();
                for (c, &l) in self.values.iter().enumerate() {
                    scaled.column_mut(c).scale_mut(f(l));
                }
                scaled * v.adjoint()
            }
        }
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
///
/// # Panics
///
/// Panics if the eigensolver fails to converge.
#[must_use]
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    match real_part(&h) {
        Some(r) => symmetric_eigenvalues(&r),
        None => complex_decomposition(&h, false).0,
    }
}

/// Spectral norm of a dense matrix.
#[must_use]
pub fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let herm_err = (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if herm_err <= 1e-14 * scale {
        let vals = hermitian_eigenvalues(m);
        return vals[0].abs().max(vals[vals.len() - 1].abs());
    }
    let gram = m.adjoint() * m;
    hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `e^{A}` for anti-Hermitian `A`, as `cos(√B) + A sinc(√B)` with
/// `B = A†A = −A²`, which keeps real generators real.
#[must_use]
pub fn expm_anti_hermitian(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let a = (a - a.adjoint()).scale(0.5);
    let b = HermitianEigen::new(&(a.adjoint() * &a));
    let root = |l: f64| l.max(0.0).sqrt();
    let cos = b.apply(|l| root(l).cos());
    let sinc = b.apply(|l| {
        let t = root(l);
        if t < 1e-4 {
            1.0 - t * t / 6.0 + t.powi(4) / 120.0
        } else {
            t.sin() / t
        }
    });
    cos + a * sinc
}

/// Restrict the letters of `key` to the qubits in `mask`, packed into the
/// low bits in increasing qubit order.
#[must_use]
pub fn compress_key(key: Key, mask: u64) -> Key {
    (pext(key.0, mask), pext(key.1, mask))
}

fn pext(v: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut bit = 0;
    let mut m = mask;
    while m != 0 {
        let low = m.trailing_zeros();
        if v >> low & 1 == 1 {
            out |= 1 << bit;
        }
        bit += 1;
        m &= m - 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliSum {
        PauliSum::from_pauli(&s.parse().unwrap(), 1.0)
    }

    #[test]
    fn products_match_letter_algebra() {
        // XZ = -iY
        let xz = p("X").mul(&p("Z"));
        assert_eq!(xz.coeff((1, 1)), Complex64::new(0.0, -1.0));
        let yy = p("XX").mul(&p("ZZ"));
        assert_eq!(yy.coeff((3, 3)), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn dense_round_trip() {
        let mut s = p("XYZ").scaled_re(0.3);
        s.add_assign(&p("IZY").scaled(Complex64::new(0.0, 0.7)));
        s.add_assign(&PauliSum::identity(3).scaled_re(-1.1));
        let back = PauliSum::from_dense(&s.to_dense(), 3, 1e-14);
        assert!(back.minus(&s).max_coeff() < 1e-14);
    }

    #[test]
    fn y_matrix_is_imaginary() {
        let y = p("Y").to_dense();
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert!(p("Y").to_dense_real().is_none());
        assert!(p("YY").to_dense_real().is_some());
    }

    #[test]
    fn pext_packs_bits() {
        assert_eq!(pext(0b1010, 0b1110), 0b101);
        assert_eq!(compress_key((0b100, 0b1000), 0b1100), (0b01, 0b10));
    }
}
