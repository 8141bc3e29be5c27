//! Syndrome-resolved operator decomposition, κ-norms, local projectors and
//! the exact Schrieffer–Wolff iteration on small codes.
//!
//! For a term with strong support `S` and syndrome `s ≠ 0`, the checks in
//! `s` lie in `S`, so `P_S V P_S = 0`. The off-diagonal part is then
//! `ℙ⊥V = P_S V + V P_S` and the generator is `A = [P_S, V] / E(s)` with
//! `E(s) = Σ_{C ∈ s} λ_C`, which solves `[H₀, A] + V = ℙV` exactly.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::code::StabilizerCode;
use crate::flow::kappa_m;
use crate::gf2::BitVector;
use crate::operator::{compress_key, expm_anti_hermitian, i_pow, keys_anticommute, op_norm, Key, PauliSum};

/// Largest patch on which payload norms are evaluated.
pub const MAX_PATCH: usize = 14;
/// Largest system handled by the dense iteration.
pub const DENSE_MAX_QUBITS: usize = 12;
/// Pauli coefficients at or below this modulus are treated as round-off.
pub const PAULI_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwtError {
    #[error("patch of {size} qubits exceeds the limit of {MAX_PATCH}")]
    PatchTooLarge { size: usize },
    #[error("{n} qubits exceed the limit of {limit} for this operation")]
    TooManyQubits { n: usize, limit: usize },
    #[error("operator acts on {found} qubits, code has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("numeric failure: {what} = {value:e} exceeds {tol:e}")]
    Numeric { what: String, value: f64, tol: f64 },
}

/// Checks of a code as bit masks, with their weights.
#[derive(Clone, Debug)]
pub struct CodeContext {
    n: usize,
    checks: Vec<Key>,
    signs: Vec<f64>,
    supports: Vec<u64>,
    lambdas: Vec<f64>,
}

impl CodeContext {
    /// # Errors
    ///
    /// Fails for more than 64 qubits.
    pub fn new(code: &StabilizerCode) -> Result<Self, SwtError> {
        if code.n() > 64 {
            return Err(SwtError::TooManyQubits { n: code.n(), limit: 64 });
        }
        let checks: Vec<Key> = code.checks().iter().map(crate::pauli::PauliString::masks).collect();
        Ok(Self {
            n: code.n(),
            supports: checks.iter().map(|(x, z)| x | z).collect(),
            signs: code.checks().iter().map(|c| f64::from(c.sign())).collect(),
            checks,
            lambdas: code.lambdas().to_vec(),
        })
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    #[must_use]
    pub fn check_support(&self, c: usize) -> u64 {
        self.supports[c]
    }

    /// Checks anticommuting with the Pauli `key`.
    #[must_use]
    pub fn syndrome(&self, key: Key) -> BitVector {
        let mut s = BitVector::zeros(self.checks.len());
        for (c, &q) in self.checks.iter().enumerate() {
            if keys_anticommute(q, key) {
                s.set(c, true);
            }
        }
        s
    }

    /// `support(P) ∪ ⋃_{C ∈ syndrome(P)} C`.
    #[must_use]
    pub fn strong_support(&self, key: Key) -> u64 {
        self.checks
            .iter()
            .zip(&self.supports)
            .filter(|(q, _)| keys_anticommute(**q, key))
            .fold(key.0 | key.1, |acc, (_, s)| acc | s)
    }

    /// `E(s) = Σ_{C ∈ s} λ_C`.
    #[must_use]
    pub fn syndrome_energy(&self, s: &BitVector) -> f64 {
        s.iter_ones().map(|c| self.lambdas[c]).sum()
    }

    /// Indices of checks supported inside `mask`.
    #[must_use]
    pub fn checks_inside(&self, mask: u64) -> Vec<usize> {
        (0..self.checks.len()).filter(|&c| self.supports[c] & !mask == 0).collect()
    }

    /// `H₀ = Σ_C λ_C (I − Q_C)/2`.
    #[must_use]
    pub fn hamiltonian(&self) -> PauliSum {
        let mut h = PauliSum::zero(self.n);
        for c in 0..self.checks.len() {
            h.add_term((0, 0), Complex64::new(self.lambdas[c] / 2.0, 0.0));
            h.add_term(self.checks[c], Complex64::new(-self.lambdas[c] * self.signs[c] / 2.0, 0.0));
        }
        h
    }

    /// `P_S = ∏_{C ⊂ S} (I + Q_C)/2` as a Pauli sum.
    #[must_use]
    pub fn local_projector(&self, mask: u64) -> PauliSum {
        self.projector_from_checks(&self.checks_inside(mask))
    }

    /// `∏_{C ∈ checks} (I + Q_C)/2`.
    #[must_use]
    pub fn projector_from_checks(&self, checks: &[usize]) -> PauliSum {
        let mut p = PauliSum::identity(self.n);
        for &c in checks {
            let mut factor = PauliSum::identity(self.n).scaled_re(0.5);
            factor.add_term(self.checks[c], Complex64::new(0.5 * self.signs[c], 0.0));
            // Skip factors already implied by earlier ones.
            if p.coeff(self.checks[c]).norm() > 0.0 && (p.coeff(self.checks[c]) - p.coeff((0, 0)) * self.signs[c]).norm() < 1e-12 {
                continue;
            }
            p = p.mul(&factor).pruned(PAULI_TOL);
        }
        p
    }
}

/// Key of a local term: strong support and syndrome.
pub type TermKey = (u64, BitVector);

/// One term `𝒪_{S,s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    pub support: u64,
    pub syndrome: BitVector,
    pub payload: PauliSum,
}

/// An operator as a sum of local terms with unique `(S, s)` keys.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiLocalOperator {
    n: usize,
    terms: BTreeMap<TermKey, PauliSum>,
}

impl QuasiLocalOperator {
    #[must_use]
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
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

    /// Add `payload` into the term at `(support, syndrome)`.
    pub fn add(&mut self, support: u64, syndrome: BitVector, payload: &PauliSum) {
        if payload.is_empty() {
            return;
        }
        let key = (support, syndrome);
        let merged = match self.terms.remove(&key) {
            Some(old) => old.plus(payload),
            None => payload.clone(),
        };
        if !merged.is_empty() {
            self.terms.insert(key, merged);
        }
    }

    pub fn add_operator(&mut self, other: &Self) {
        for ((s, syn), p) in &other.terms {
            self.add(*s, syn.clone(), p);
        }
    }

    #[must_use]
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_operator(other);
        out
    }

    #[must_use]
    pub fn scaled_re(&self, c: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(k, p)| (k.clone(), p.scaled_re(c))).collect(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = LocalTerm> + '_ {
        self.terms.iter().map(|((s, syn), p)| LocalTerm {
            support: *s,
            syndrome: syn.clone(),
            payload: p.clone(),
        })
    }

    /// Sum of all payloads.
    #[must_use]
    pub fn total(&self) -> PauliSum {
        let mut out = PauliSum::zero(self.n);
        for p in self.terms.values() {
            out.add_assign(p);
        }
        out
    }

    /// Terms with `|S| < d_s` and the rest.
    #[must_use]
    pub fn split_by_size(&self, d_s: usize) -> (Self, Self) {
        let mut small = Self::zero(self.n);
        let mut large = Self::zero(self.n);
        for ((s, syn), p) in &self.terms {
            let target = if (s.count_ones() as usize) < d_s { &mut small } else { &mut large };
            target.terms.insert((*s, syn.clone()), p.clone());
        }
        (small, large)
    }

    #[must_use]
    pub fn max_support(&self) -> usize {
        self.terms.keys().map(|(s, _)| s.count_ones() as usize).max().unwrap_or(0)
    }
}

/// Canonical decomposition: each Pauli goes to its strong support and
/// syndrome.
///
/// # Errors
///
/// Fails if the operator and code act on different qubit counts.
pub fn decompose(op: &PauliSum, ctx: &CodeContext) -> Result<QuasiLocalOperator, SwtError> {
    if op.n() != ctx.n {
        return Err(SwtError::LengthMismatch {
            expected: ctx.n,
            found: op.n(),
        });
    }
    let mut grouped: BTreeMap<TermKey, PauliSum> = BTreeMap::new();
    for (k, c) in op.iter() {
        let key = (ctx.strong_support(k), ctx.syndrome(k));
        grouped.entry(key).or_insert_with(|| PauliSum::zero(ctx.n)).add_term(k, c);
    }
    Ok(QuasiLocalOperator { n: ctx.n, terms: grouped })
}

/// Operator norm of a payload on its `2^{|S|}`-dimensional patch.
///
/// # Errors
///
/// Rejects patches larger than [`MAX_PATCH`].
pub fn patch_norm(payload: &PauliSum, support: u64) -> Result<f64, SwtError> {
    let size = support.count_ones() as usize;
    if size > MAX_PATCH {
        return Err(SwtError::PatchTooLarge { size });
    }
    if payload.is_empty() {
        return Ok(0.0);
    }
    if payload.len() == 1 {
        return Ok(payload.max_coeff());
    }
    let mut local = PauliSum::zero(size);
    for (k, c) in payload.iter() {
        local.add_term(compress_key(k, support), c);
    }
    if size <= 10 {
        return Ok(op_norm(&local.to_dense()));
    }
    Ok(lanczos_norm(&local))
}

/// `‖M‖ = sqrt(λ_max(M†M))` by Lanczos with full reorthogonalization.
fn lanczos_norm(m: &PauliSum) -> f64 {
    let gram = m.adjoint().mul(m).pruned(PAULI_TOL);
    let dim = 1usize << m.n();
    let steps = dim.min(120);
    let apply = |v: &[Complex64]| {
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        for (k, c) in gram.iter() {
            let base = c * i_pow((k.0 & k.1).count_ones());
            for (b, vb) in v.iter().enumerate() {
                let sign = if (k.1 & b as u64).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                y[(b as u64 ^ k.0) as usize] += base * sign * vb;
            }
        }
        y
    };
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut v: Vec<Complex64> = (0..dim).map(|i| Complex64::new(1.0 + (i as f64 * 0.618).fract(), 0.0)).collect();
    let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= nrm);
    let mut t = DMatrix::<f64>::zeros(steps, steps);
    let mut k_used = 0;
    for j in 0..steps {
        basis.push(v.clone());
        let mut w = apply(&v);
        for (i, b) in basis.iter().enumerate() {
            let c: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
            t[(i, j)] = c.re;
            t[(j, i)] = c.re;
            w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
        }
        for b in &basis {
            let c: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
            w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
        }
        k_used = j + 1;
        let beta = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if beta < 1e-12 || j + 1 == steps {
            break;
        }
        w.iter_mut().for_each(|c| *c /= beta);
        v = w;
    }
    let t = t.view((0, 0), (k_used, k_used)).into_owned();
    let (vals, _) = crate::operator::symmetric_eigen(&t);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Per-term patch norms, reusable across κ values.
#[derive(Clone, Debug, PartialEq)]
pub struct TermNorms {
    n: usize,
    entries: Vec<(u64, f64)>,
}

impl TermNorms {
    /// # Errors
    ///
    /// Propagates [`patch_norm`] failures.
    pub fn new(op: &QuasiLocalOperator) -> Result<Self, SwtError> {
        let entries = op
            .terms
            .iter()
            .map(|((s, _), p)| patch_norm(p, *s).map(|v| (*s, v)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { n: op.n, entries })
    }

    /// `max_i Σ_{S ∋ i} Σ_s ‖𝒪_{S,s}‖ e^{κ|S|}`.
    #[must_use]
    pub fn kappa_norm(&self, kappa: f64) -> f64 {
        let mut per_site = vec![0.0; self.n];
        for &(s, v) in &self.entries {
            let w = v * (kappa * f64::from(s.count_ones())).exp();
            let mut m = s;
            while m != 0 {
                per_site[m.trailing_zeros() as usize] += w;
                m &= m - 1;
            }
        }
        per_site.into_iter().fold(0.0, f64::max)
    }

    /// Largest single-term norm.
    #[must_use]
    pub fn max_term(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

/// `‖𝒪‖_κ`.
///
/// # Errors
///
/// Rejects patches above [`MAX_PATCH`] qubits.
///
/// # Panics
///
/// Panics if `kappa <= 0`.
pub fn kappa_norm(op: &QuasiLocalOperator, kappa: f64) -> Result<f64, SwtError> {
    assert!(kappa > 0.0, "κ must be positive");
    Ok(TermNorms::new(op)?.kappa_norm(kappa))
}

/// `(ℙ part, ℙ⊥ part)` of one term.
#[must_use]
pub fn block_split(term: &LocalTerm, ctx: &CodeContext) -> (PauliSum, PauliSum) {
    if term.syndrome.is_zero() {
        return (term.payload.clone(), PauliSum::zero(ctx.n));
    }
    let p = ctx.local_projector(term.support);
    let off = p.mul(&term.payload).plus(&term.payload.mul(&p)).pruned(PAULI_TOL);
    (term.payload.minus(&off).pruned(PAULI_TOL), off)
}

/// `(ℙ𝒪, ℙ⊥𝒪)` keeping every term's key.
#[must_use]
pub fn split_blocks(op: &QuasiLocalOperator, ctx: &CodeContext) -> (QuasiLocalOperator, QuasiLocalOperator) {
    let mut diag = QuasiLocalOperator::zero(op.n);
    let mut off = QuasiLocalOperator::zero(op.n);
    for t in op.terms() {
        let (d, o) = block_split(&t, ctx);
        diag.add(t.support, t.syndrome.clone(), &d);
        off.add(t.support, t.syndrome, &o);
    }
    (diag, off)
}

/// Anti-Hermitian `A` with `[H₀, A] + V = ℙV`, term by term.
///
/// # Errors
///
/// Returns [`SwtError::Internal`] if a zero-syndrome term has a
/// block-off-diagonal part.
pub fn solve_generator(ctx: &CodeContext, v: &QuasiLocalOperator) -> Result<QuasiLocalOperator, SwtError> {
    let mut a = QuasiLocalOperator::zero(v.n);
    for t in v.terms() {
        let p = ctx.local_projector(t.support);
        let comm = p.mul(&t.payload).minus(&t.payload.mul(&p)).pruned(PAULI_TOL);
        if t.syndrome.is_zero() {
            if comm.max_coeff() > 1e-12 {
                return Err(SwtError::Internal("zero-syndrome term does not commute with P_S".into()));
            }
            continue;
        }
        let e = ctx.syndrome_energy(&t.syndrome);
        a.add(t.support, t.syndrome, &comm.scaled_re(1.0 / e));
    }
    Ok(a)
}

/// `Σ|c|` of `[H₀, A] + V − ℙV`, an upper bound on its operator norm.
#[must_use]
pub fn generator_residual(ctx: &CodeContext, v: &QuasiLocalOperator, a: &QuasiLocalOperator) -> f64 {
    let (pv, _) = split_blocks(v, ctx);
    ctx.hamiltonian()
        .commutator(&a.total())
        .plus(&v.total())
        .minus(&pv.total())
        .l1_norm()
}

/// `[D, A]` grouped by `(S ∪ S′, s + s′)` over overlapping pairs.
#[must_use]
pub fn commutator_structured(d: &QuasiLocalOperator, a: &QuasiLocalOperator) -> QuasiLocalOperator {
    let mut out = QuasiLocalOperator::zero(d.n);
    for td in d.terms() {
        for ta in a.terms() {
            if td.support & ta.support == 0 {
                continue;
            }
            let c = td.payload.commutator(&ta.payload).pruned(PAULI_TOL);
            out.add(td.support | ta.support, td.syndrome.xor(&ta.syndrome), &c);
        }
    }
    out
}

/// Random Hermitian Pauli sum with `terms` strings on supports grown
/// from a random seed qubit through shared checks, weights `1..=max_weight`
/// and coefficients uniform in `[−1, 1]`.
pub fn random_local_operator(ctx: &CodeContext, rng: &mut impl Rng, terms: usize, max_weight: usize) -> PauliSum {
    let n = ctx.n;
    let mut out = PauliSum::zero(n);
    for _ in 0..terms {
        let w = rng.gen_range(1..=max_weight.min(n).max(1));
        let mut support = 1u64 << rng.gen_range(0..n);
        let mut guard = 0;
        while (support.count_ones() as usize) < w && guard < 64 {
            guard += 1;
            let touching: Vec<u64> = ctx.supports.iter().copied().filter(|s| s & support != 0).collect();
            let frontier = touching.iter().fold(0u64, |acc, s| acc | s) & !support;
            if frontier == 0 {
                break;
            }
            let bits: Vec<u32> = (0..64).filter(|b| frontier >> b & 1 == 1).collect();
            support |= 1 << bits[rng.gen_range(0..bits.len())];
        }
        let (mut x, mut z) = (0u64, 0u64);
        let mut m = support;
        while m != 0 {
            let b = m.trailing_zeros();
            match rng.gen_range(0..3) {
                0 => x |= 1 << b,
                1 => z |= 1 << b,
                _ => {
                    x |= 1 << b;
                    z |= 1 << b;
                }
            }
            m &= m - 1;
        }
        out.add_term((x, z), Complex64::new(rng.gen_range(-1.0..=1.0), 0.0));
    }
    out
}

/// Output of one iteration step.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub d: QuasiLocalOperator,
    pub v: QuasiLocalOperator,
    pub e: DMatrix<Complex64>,
    pub a: QuasiLocalOperator,
    pub exp_a: DMatrix<Complex64>,
    pub generator_residual: f64,
    pub conjugation_error: f64,
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// One exact step `e^{−𝒜}(H₀ + D + V + E) = H₀ + D′ + V′ + E′`.
///
/// # Errors
///
/// Fails above [`DENSE_MAX_QUBITS`] or when the conjugation identity
/// misses `1e-9` in Frobenius norm.
pub fn swt_step(
    ctx: &CodeContext,
    d: &QuasiLocalOperator,
    v: &QuasiLocalOperator,
    e: &DMatrix<Complex64>,
    d_s: usize,
) -> Result<StepOutput, SwtError> {
    if ctx.n > DENSE_MAX_QUBITS {
        return Err(SwtError::TooManyQubits {
            n: ctx.n,
            limit: DENSE_MAX_QUBITS,
        });
    }
    let a = solve_generator(ctx, v)?;
    let generator_residual = generator_residual(ctx, v, &a);
    let (pv, _) = split_blocks(v, ctx);
    let d_next = d.plus(&pv);
    let h0 = ctx.hamiltonian().to_dense();
    let exp_a = expm_anti_hermitian(&a.total().to_dense());
    let exp_ma = exp_a.adjoint();
    let base = &h0 + d.total().to_dense() + v.total().to_dense();
    let rotated = &exp_ma * base * &exp_a;
    let w = &rotated - &h0 - d_next.total().to_dense();
    let w_sum = PauliSum::from_dense(&w, ctx.n, PAULI_TOL);
    let (v_next, large) = decompose(&w_sum, ctx)?.split_by_size(d_s);
    let e_next = &exp_ma * e * &exp_a + large.total().to_dense();
    let lhs = rotated + &exp_ma * e * &exp_a;
    let rhs = &h0 + d_next.total().to_dense() + v_next.total().to_dense() + &e_next;
    let conjugation_error = frobenius(&(lhs - rhs));
    if conjugation_error > 1e-9 {
        return Err(SwtError::Numeric {
            what: "conjugation identity".into(),
            value: conjugation_error,
            tol: 1e-9,
        });
    }
    Ok(StepOutput {
        d: d_next,
        v: v_next,
        e: e_next,
        a,
        exp_a,
        generator_residual,
        conjugation_error,
    })
}

/// Bookkeeping for order `m`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct OrderRecord {
    pub m: usize,
    pub kappa: f64,
    /// `v_m = ‖V_m‖_{κ_m}`.
    pub v: f64,
    /// `ṽ_m = ‖ℙ⊥V_m‖_{κ_m}`.
    pub v_tilde: f64,
    /// `‖A_m‖_{κ_m}`; zero at the last order.
    pub a: f64,
    /// `‖A_m‖_{κ₁/2}`.
    pub a_half: f64,
    pub d: f64,
    /// Operator norm of `E_m`.
    pub e_norm: f64,
    pub generator_residual: f64,
    pub conjugation_error: f64,
    pub v_terms: usize,
}

/// Result of [`swt_run`].
#[derive(Clone, Debug)]
pub struct SwtRun {
    pub epsilon: f64,
    pub kappa1: f64,
    pub d_s: usize,
    pub orders: Vec<OrderRecord>,
    pub d: QuasiLocalOperator,
    pub v: QuasiLocalOperator,
    pub e: DMatrix<Complex64>,
    pub generators: Vec<QuasiLocalOperator>,
    /// `U_m = e^{A₁} ⋯ e^{A_m}` for `m = 0, 1, …` (starting at `I`).
    pub unitaries: Vec<DMatrix<Complex64>>,
    /// `max_m 2^m ‖A_m‖_{κ₁/2}`.
    pub schedule_sup: f64,
    /// `v_m` grew for three consecutive orders.
    pub diverged: bool,
    pub unitarity_error: f64,
}

impl SwtRun {
    /// Final unitary.
    #[must_use]
    pub fn unitary(&self) -> &DMatrix<Complex64> {
        self.unitaries.last().expect("at least the identity")
    }
}

/// Initial split `D₁ = 0`, `V₁` = terms with `|S| < d_s`, `E₁` = rest.
///
/// # Errors
///
/// Propagates decomposition errors.
pub fn initial_split(ctx: &CodeContext, v: &PauliSum, d_s: usize) -> Result<(QuasiLocalOperator, QuasiLocalOperator, DMatrix<Complex64>), SwtError> {
    let (small, large) = decompose(v, ctx)?.split_by_size(d_s);
    let dim = 1usize << ctx.n;
    let e = if large.is_empty() {
        DMatrix::zeros(dim, dim)
    } else {
        large.total().to_dense()
    };
    Ok((QuasiLocalOperator::zero(ctx.n), small, e))
}

/// Iterate [`swt_step`] until order `m_target`, tracking norms at
/// `κ_m = (κ₁/2)(1 + 1/(1 + ln m))`.
///
/// # Errors
///
/// Propagates step failures; divergence is only flagged.
pub fn swt_run(code: &StabilizerCode, v: &PauliSum, m_target: usize, d_s: usize, kappa1: f64) -> Result<SwtRun, SwtError> {
    let ctx = CodeContext::new(code)?;
    if ctx.n > DENSE_MAX_QUBITS {
        return Err(SwtError::TooManyQubits {
            n: ctx.n,
            limit: DENSE_MAX_QUBITS,
        });
    }
    let epsilon = kappa_norm(&decompose(v, &ctx)?, kappa1)?;
    let (mut d, mut v_m, mut e) = initial_split(&ctx, v, d_s)?;
    let dim = 1usize << ctx.n;
    let mut unitaries = vec![DMatrix::<Complex64>::identity(dim, dim)];
    let mut orders = Vec::new();
    let mut generators = Vec::new();
    let mut schedule_sup: f64 = 0.0;
    let mut growth_streak = 0;
    let mut diverged = false;
    let m_target = m_target.max(1);
    for m in 1..=m_target {
        let kappa = kappa_m(kappa1, m);
        let (_, off) = split_blocks(&v_m, &ctx);
        let v_norm = kappa_norm(&v_m, kappa)?;
        let v_tilde = kappa_norm(&off, kappa)?;
        let d_norm = kappa_norm(&d, kappa)?;
        let e_norm = op_norm(&e);
        if let Some(prev) = orders.last().map(|o: &OrderRecord| o.v) {
            if v_norm > prev {
                growth_streak += 1;
                diverged |= growth_streak >= 3;
            } else {
                growth_streak = 0;
            }
        }
        let mut record = OrderRecord {
            m,
            kappa,
            v: v_norm,
            v_tilde,
            a: 0.0,
            a_half: 0.0,
            d: d_norm,
            e_norm,
            generator_residual: 0.0,
            conjugation_error: 0.0,
            v_terms: v_m.len(),
        };
        if m == m_target {
            orders.push(record);
            break;
        }
        let step = swt_step(&ctx, &d, &v_m, &e, d_s)?;
        let a_norms = TermNorms::new(&step.a)?;
        record.a = a_norms.kappa_norm(kappa);
        record.a_half = a_norms.kappa_norm(kappa1 / 2.0);
        record.generator_residual = step.generator_residual;
        record.conjugation_error = step.conjugation_error;
        schedule_sup = schedule_sup.max(2f64.powi(m as i32) * record.a_half);
        orders.push(record);
        let u = unitaries.last().expect("non-empty") * &step.exp_a;
        unitaries.push(u);
        generators.push(step.a);
        d = step.d;
        v_m = step.v;
        e = step.e;
    }
    let u = unitaries.last().expect("non-empty");
    let unitarity_error = op_norm(&(u.adjoint() * u - DMatrix::<Complex64>::identity(dim, dim)));
    Ok(SwtRun {
        epsilon,
        kappa1,
        d_s,
        orders,
        d,
        v: v_m,
        e,
        generators,
        unitaries,
        schedule_sup,
        diverged,
        unitarity_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::repetition_code;

    #[test]
    fn identity_has_empty_support() {
        let code = repetition_code(3).unwrap();
        let ctx = CodeContext::new(&code).unwrap();
        let q = decompose(&PauliSum::identity(3), &ctx).unwrap();
        let t: Vec<_> = q.terms().collect();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].support, 0);
        assert!(t[0].syndrome.is_zero());
    }

    #[test]
    fn projector_skips_dependent_checks() {
        let code = crate::constructors::ising_code(&crate::constructors::Graph::cycle(4)).unwrap();
        let ctx = CodeContext::new(&code).unwrap();
        let p = ctx.local_projector(0b1111);
        // Group of ZZ cycle checks has 8 elements.
        assert_eq!(p.len(), 8);
        assert!((p.coeff((0, 0)).re - 0.125).abs() < 1e-15);
    }
}
