//! Stabilizer codes, their logical operators, parameters and check graphs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{self, BitMatrix, BitVector, Echelon};
use crate::pauli::{Letter, PauliError, PauliString};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("check {index} acts on {found} qubits, code has {expected}")]
    LengthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("checks {0} and {1} anticommute")]
    Anticommuting(usize, usize),
    #[error("check {index} has weight λ = {value}, need λ ≥ 1")]
    LambdaOutOfRange { index: usize, value: f64 },
    #[error("expected {expected} weights, found {found}")]
    LambdaCount { expected: usize, found: usize },
    #[error("check {0} has sign -1; checks must have sign +1")]
    NegativeCheck(usize),
    #[error("product of checks {0:?} equals -I, so the code space is empty")]
    EmptyCodeSpace(Vec<usize>),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    /// Only Z-type checks.
    Classical,
    /// Every check is X-type or Z-type.
    Css,
    General,
}

/// A commuting set of Hermitian Pauli checks with Hamiltonian weights.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerCode {
    n: usize,
    checks: Vec<PauliString>,
    lambdas: Vec<f64>,
    kind: CodeKind,
}

impl StabilizerCode {
    /// Build and validate a code with all weights equal to 1.
    ///
    /// # Errors
    ///
    /// See [`StabilizerCode::with_lambdas`].
    pub fn new(n: usize, checks: Vec<PauliString>) -> Result<Self, CodeError> {
        let lambdas = vec![1.0; checks.len()];
        Self::with_lambdas(n, checks, lambdas)
    }

    /// Build and validate a code.
    ///
    /// # Errors
    ///
    /// Fails if a check has the wrong length or a negative sign, two checks
    /// anticommute, a weight is below 1, or the checks generate `-I`.
    pub fn with_lambdas(n: usize, checks: Vec<PauliString>, lambdas: Vec<f64>) -> Result<Self, CodeError> {
        if lambdas.len() != checks.len() {
            return Err(CodeError::LambdaCount {
                expected: checks.len(),
                found: lambdas.len(),
            });
        }
        for (index, c) in checks.iter().enumerate() {
            if c.n() != n {
                return Err(CodeError::LengthMismatch {
                    index,
                    expected: n,
                    found: c.n(),
                });
            }
            if c.is_negative() {
                return Err(CodeError::NegativeCheck(index));
            }
        }
        for (index, &value) in lambdas.iter().enumerate() {
            if !(value >= 1.0 && value.is_finite()) {
                return Err(CodeError::LambdaOutOfRange { index, value });
            }
        }
        for i in 0..checks.len() {
            for j in i + 1..checks.len() {
                if checks[i].anticommutes(&checks[j])? {
                    return Err(CodeError::Anticommuting(i, j));
                }
            }
        }
        let kind = if checks.iter().all(PauliString::is_z_type) {
            CodeKind::Classical
        } else if checks.iter().all(|c| c.is_x_type() || c.is_z_type()) {
            CodeKind::Css
        } else {
            CodeKind::General
        };
        let code = Self {
            n,
            checks,
            lambdas,
            kind,
        };
        for combo in Echelon::new(&code.check_matrix()).null_combos {
            let idx: Vec<usize> = combo.iter_ones().collect();
            if code.product_of(&idx).is_negative() {
                return Err(CodeError::EmptyCodeSpace(idx));
            }
        }
        Ok(code)
    }

    /// Same checks with new weights.
    ///
    /// # Errors
    ///
    /// Fails on a count mismatch or a weight below 1.
    pub fn reweighted(&self, lambdas: Vec<f64>) -> Result<Self, CodeError> {
        Self::with_lambdas(self.n, self.checks.clone(), lambdas)
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn checks(&self) -> &[PauliString] {
        &self.checks
    }

    #[must_use]
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    #[must_use]
    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    #[must_use]
    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    /// Rows `[x | z]` of length `2n`, one per check.
    #[must_use]
    pub fn check_matrix(&self) -> BitMatrix {
        symplectic_matrix(self.n, &self.checks)
    }

    /// Product of the listed checks, with sign.
    ///
    /// # Panics
    ///
    /// Panics if an index is out of range.
    #[must_use]
    pub fn product_of(&self, idx: &[usize]) -> PauliString {
        let mut acc = PauliString::identity(self.n);
        for &i in idx {
            acc = acc
                .multiply(&self.checks[i])
                .expect("checks commute, so products stay Hermitian");
        }
        acc
    }

    /// Number of independent checks.
    #[must_use]
    pub fn rank(&self) -> usize {
        gf2::rank(&self.check_matrix())
    }

    /// Number of logical qubits.
    #[must_use]
    pub fn k(&self) -> usize {
        self.n - self.rank()
    }

    /// Checks of one Pauli type, as a matrix over the matching bit part.
    #[must_use]
    pub fn sector_matrix(&self, sector: Sector) -> BitMatrix {
        let rows = self
            .checks
            .iter()
            .filter(|c| sector.contains(c))
            .map(|c| sector.bits(c).clone())
            .collect();
        BitMatrix::from_rows(self.n, rows).expect("check lengths validated")
    }

    /// Indices of checks of one Pauli type.
    #[must_use]
    pub fn sector_indices(&self, sector: Sector) -> Vec<usize> {
        (0..self.checks.len())
            .filter(|&i| sector.contains(&self.checks[i]))
            .collect()
    }
}

/// Pauli type of a CSS sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    X,
    Z,
}

impl Sector {
    fn contains(self, p: &PauliString) -> bool {
        match self {
            Self::X => p.is_x_type() && !p.is_identity_up_to_sign(),
            Self::Z => p.is_z_type() && !p.is_identity_up_to_sign(),
        }
    }

    fn bits(self, p: &PauliString) -> &BitVector {
        match self {
            Self::X => p.x_bits(),
            Self::Z => p.z_bits(),
        }
    }

    #[must_use]
    pub fn pauli(self, bits: BitVector) -> PauliString {
        let n = bits.len();
        match self {
            Self::X => PauliString::from_bits(bits, BitVector::zeros(n), false),
            Self::Z => PauliString::from_bits(BitVector::zeros(n), bits, false),
        }
    }
}

/// Symplectic rows `[x | z]`.
#[must_use]
pub fn symplectic_matrix(n: usize, paulis: &[PauliString]) -> BitMatrix {
    let rows = paulis.iter().map(|p| p.x_bits().concat(p.z_bits())).collect();
    BitMatrix::from_rows(2 * n, rows).expect("uniform lengths")
}

/// Split a symplectic `[x | z]` vector back into a Pauli string.
#[must_use]
pub fn pauli_from_symplectic(v: &BitVector) -> PauliString {
    let n = v.len() / 2;
    PauliString::from_bits(v.slice(0, n), v.slice(n, 2 * n), false)
}

/// Bit `c` is set iff `p` anticommutes with check `c`.
///
/// # Panics
///
/// Panics if `p.n() != code.n()`.
#[must_use]
pub fn syndrome_of(code: &StabilizerCode, p: &PauliString) -> BitVector {
    let mut s = BitVector::zeros(code.num_checks());
    for (i, c) in code.checks.iter().enumerate() {
        if c.anticommutes(p).expect("qubit count checked by caller") {
            s.set(i, true);
        }
    }
    s
}

/// Interaction graph on qubits and its growth data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeGraphMetrics {
    /// Qubit pairs sharing a check, `i < j`.
    pub edges: Vec<(usize, usize)>,
    /// Maximum qubit degree.
    pub delta: usize,
    /// Maximum check weight.
    pub q: usize,
    /// Maximum number of checks on one qubit.
    pub q_prime: usize,
    /// `ball_volume[i][r] = |B_{i,r}|` for `r` up to the eccentricity of `i`.
    pub ball_volume: Vec<Vec<usize>>,
}

impl CodeGraphMetrics {
    /// `Γ_i(r)`, saturating past the eccentricity.
    #[must_use]
    pub fn gamma_ball(&self, i: usize, r: usize) -> usize {
        let b = &self.ball_volume[i];
        b[r.min(b.len() - 1)]
    }

    /// `γ_i(r) = Γ_i(r) − Γ_i(r−1)`, with `γ_i(0) = 1`.
    #[must_use]
    pub fn gamma_shell(&self, i: usize, r: usize) -> usize {
        if r == 0 {
            1
        } else {
            self.gamma_ball(i, r) - self.gamma_ball(i, r - 1)
        }
    }

    /// `max_i γ_i(r)`.
    #[must_use]
    pub fn max_shell(&self, r: usize) -> usize {
        (0..self.ball_volume.len())
            .map(|i| self.gamma_shell(i, r))
            .max()
            .unwrap_or(0)
    }

    /// `max_i Γ_i(r)`.
    #[must_use]
    pub fn max_ball(&self, r: usize) -> usize {
        (0..self.ball_volume.len())
            .map(|i| self.gamma_ball(i, r))
            .max()
            .unwrap_or(0)
    }

    /// Largest eccentricity.
    #[must_use]
    pub fn diameter(&self) -> usize {
        self.ball_volume.iter().map(|b| b.len() - 1).max().unwrap_or(0)
    }
}

/// Re-check a code and compute its interaction-graph metrics.
///
/// # Errors
///
/// Returns the first violated code invariant.
pub fn validate(code: &StabilizerCode) -> Result<CodeGraphMetrics, CodeError> {
    let code = StabilizerCode::with_lambdas(code.n, code.checks.clone(), code.lambdas.clone())?;
    let n = code.n;
    let mut adj = vec![BitVector::zeros(n); n];
    let mut per_qubit = vec![0usize; n];
    let mut q = 0;
    for c in &code.checks {
        let s = c.support();
        q = q.max(s.len());
        for &i in &s {
            per_qubit[i] += 1;
            for &j in &s {
                if i != j {
                    adj[i].set(j, true);
                }
            }
        }
    }
    let mut edges = Vec::new();
    for (i, row) in adj.iter().enumerate() {
        edges.extend(row.iter_ones().filter(|&j| j > i).map(|j| (i, j)));
    }
    let neighbours: Vec<Vec<usize>> = adj.iter().map(|r| r.iter_ones().collect()).collect();
    let delta = neighbours.iter().map(Vec::len).max().unwrap_or(0);
    let ball_volume = (0..n).map(|i| ball_profile(&neighbours, i)).collect();
    Ok(CodeGraphMetrics {
        edges,
        delta,
        q,
        q_prime: per_qubit.into_iter().max().unwrap_or(0),
        ball_volume,
    })
}

fn ball_profile(neighbours: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; neighbours.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut shells = vec![0usize];
    while let Some(u) = queue.pop_front() {
        let d = dist[u];
        if shells.len() <= d {
            shells.push(0);
        }
        shells[d] += 1;
        for &v in &neighbours[u] {
            if dist[v] == usize::MAX {
                dist[v] = d + 1;
                queue.push_back(v);
            }
        }
    }
    let mut acc = 0;
    shells
        .into_iter()
        .map(|s| {
            acc += s;
            acc
        })
        .collect()
}

/// Pick vectors from `candidates` extending `span(base)` until `count`
/// new independent vectors are found.
fn extend_basis(base: &[BitVector], candidates: &[BitVector], count: usize, len: usize) -> Vec<BitVector> {
    let mut span = BitMatrix::from_rows(len, base.to_vec()).expect("uniform lengths");
    let mut rank = gf2::rank(&span);
    let mut out = Vec::new();
    for c in candidates {
        if out.len() == count {
            break;
        }
        span.push_row(c.clone());
        let r = gf2::rank(&span);
        if r > rank {
            rank = r;
            out.push(c.clone());
        } else {
            let last = span.nrows() - 1;
            span = BitMatrix::from_rows(len, span.rows()[..last].to_vec()).expect("uniform lengths");
        }
    }
    out
}

/// Make `xs[i] · zs[j] = δ_ij` by row operations that keep each list's span.
fn pair_up(xs: &mut [BitVector], zs: &mut [BitVector], dot: impl Fn(&BitVector, &BitVector) -> bool) {
    let k = xs.len();
    for i in 0..k {
        let j = (i..k)
            .find(|&j| dot(&xs[i], &zs[j]))
            .expect("logical candidates are non-degenerate");
        zs.swap(i, j);
        for j in 0..k {
            if j != i && dot(&xs[i], &zs[j]) {
                let zi = zs[i].clone();
                zs[j].xor_assign(&zi);
            }
        }
        for l in 0..k {
            if l != i && dot(&xs[l], &zs[i]) {
                let xi = xs[i].clone();
                xs[l].xor_assign(&xi);
            }
        }
    }
}

/// Symplectic product of `[x | z]` vectors.
#[must_use]
pub fn symplectic_dot(a: &BitVector, b: &BitVector) -> bool {
    let n = a.len() / 2;
    a.slice(0, n).dot(&b.slice(n, 2 * n)) ^ a.slice(n, 2 * n).dot(&b.slice(0, n))
}

/// `k` logical pairs `(X̄_i, Z̄_i)`.
///
/// For CSS and classical codes `X̄_i` is X-type and `Z̄_i` is Z-type.
#[must_use]
pub fn logicals(code: &StabilizerCode) -> Vec<(PauliString, PauliString)> {
    let n = code.n;
    let k = code.k();
    if k == 0 {
        return Vec::new();
    }
    if code.kind != CodeKind::General {
        let hx = code.sector_matrix(Sector::X);
        let hz = code.sector_matrix(Sector::Z);
        let units = |h: &BitMatrix| -> Vec<BitVector> {
            (0..n)
                .map(|q| BitVector::from_indices(n, &[q]))
                .filter(|e| h.mul_vec(e).is_zero())
                .collect()
        };
        let mut xcand = units(&hz);
        xcand.extend(hz.kernel());
        let mut zcand = units(&hx);
        zcand.extend(hx.kernel());
        let mut xs = extend_basis(hx.rows(), &xcand, k, n);
        let mut zs = extend_basis(hz.rows(), &zcand, k, n);
        pair_up(&mut xs, &mut zs, BitVector::dot);
        return xs
            .into_iter()
            .zip(zs)
            .map(|(x, z)| (Sector::X.pauli(x), Sector::Z.pauli(z)))
            .collect();
    }
    let s = code.check_matrix();
    let swapped = BitMatrix::from_rows(
        2 * n,
        s.rows().iter().map(|r| r.slice(n, 2 * n).concat(&r.slice(0, n))).collect(),
    )
    .expect("uniform lengths");
    let mut cands: Vec<BitVector> = (0..2 * n)
        .map(|i| BitVector::from_indices(2 * n, &[i]))
        .filter(|e| swapped.mul_vec(e).is_zero())
        .collect();
    cands.extend(swapped.kernel());
    let mut rest = extend_basis(s.rows(), &cands, 2 * k, 2 * n);
    let mut pairs = Vec::new();
    while !rest.is_empty() {
        let v = rest.remove(0);
        let j = rest
            .iter()
            .position(|w| symplectic_dot(&v, w))
            .expect("normalizer modulo stabilizer is symplectic");
        let w = rest.remove(j);
        for u in &mut rest {
            let a = symplectic_dot(u, &w);
            let b = symplectic_dot(u, &v);
            if a {
                u.xor_assign(&v);
            }
            if b {
                u.xor_assign(&w);
            }
        }
        pairs.push((pauli_from_symplectic(&v), pauli_from_symplectic(&w)));
    }
    pairs
}

/// A distance that is either exact or a certified lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Distance {
    Exact(usize),
    AtLeast(usize),
}

impl Distance {
    #[must_use]
    pub fn value(self) -> usize {
        match self {
            Self::Exact(d) | Self::AtLeast(d) => d,
        }
    }

    #[must_use]
    pub fn min(self, other: Self) -> Self {
        match (self, other) {
            (Self::Exact(a), Self::Exact(b)) => Self::Exact(a.min(b)),
            (Self::Exact(a), Self::AtLeast(b)) | (Self::AtLeast(b), Self::Exact(a)) => {
                if a <= b {
                    Self::Exact(a)
                } else {
                    Self::AtLeast(b)
                }
            }
            (Self::AtLeast(a), Self::AtLeast(b)) => Self::AtLeast(a.min(b)),
        }
    }
}

/// `⟦n, k, d⟧` with per-sector distances for CSS and classical codes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParameters {
    pub n: usize,
    pub k: usize,
    /// `None` when `k = 0`.
    pub d: Option<Distance>,
    pub d_x: Option<Distance>,
    pub d_z: Option<Distance>,
}

/// Default cap on distance searches.
#[must_use]
pub fn default_w_max(n: usize) -> usize {
    n.min(8)
}

/// Compute `n`, `k` and distances, searching weights up to `w_max`.
///
/// Classical codes report `d = d_x`.
#[must_use]
pub fn code_parameters(code: &StabilizerCode, w_max: usize) -> CodeParameters {
    let n = code.n;
    let k = code.k();
    if k == 0 {
        return CodeParameters {
            n,
            k,
            d: None,
            d_x: None,
            d_z: None,
        };
    }
    if code.kind == CodeKind::General {
        return CodeParameters {
            n,
            k,
            d: Some(general_distance(code, w_max)),
            d_x: None,
            d_z: None,
        };
    }
    let pairs = logicals(code);
    let xl: Vec<BitVector> = pairs.iter().map(|(x, _)| x.x_bits().clone()).collect();
    let zl: Vec<BitVector> = pairs.iter().map(|(_, z)| z.z_bits().clone()).collect();
    let d_x = sector_distance(&code.sector_matrix(Sector::X), &xl, w_max);
    let d_z = sector_distance(&code.sector_matrix(Sector::Z), &zl, w_max);
    let d = if code.kind == CodeKind::Classical {
        d_x
    } else {
        d_x.min(d_z)
    };
    CodeParameters {
        n,
        k,
        d: Some(d),
        d_x: Some(d_x),
        d_z: Some(d_z),
    }
}

/// Minimum weight over `span(logical) \ {0}` shifted by the stabilizer rows.
fn sector_distance(stab: &BitMatrix, logical: &[BitVector], w_max: usize) -> Distance {
    let n = stab.ncols();
    let mut best: Option<usize> = None;
    for mask in 1u64..(1u64 << logical.len()) {
        let mut coset = BitVector::zeros(n);
        for (i, l) in logical.iter().enumerate() {
            if mask >> i & 1 == 1 {
                coset.xor_assign(l);
            }
        }
        let cap = best.map_or(w_max, |b| b.saturating_sub(1).min(w_max));
        if let Some(m) = gf2::min_weight_codeword(stab, &coset, cap).expect("lengths agree") {
            best = Some(m.weight);
        }
    }
    best.map_or(Distance::AtLeast(w_max + 1), Distance::Exact)
}

/// Smallest-weight Pauli commuting with every check but outside the
/// stabilizer group.
fn general_distance(code: &StabilizerCode, w_max: usize) -> Distance {
    let n = code.n;
    let ech = Echelon::new(&code.check_matrix());
    let letters = [Letter::X, Letter::Y, Letter::Z];
    for w in 1..=w_max.min(n) {
        let mut found = false;
        gf2::for_each_subset(n, w, |idx| {
            let total = 3usize.pow(w as u32);
            for code_word in 0..total {
                let mut p = PauliString::identity(n);
                let mut c = code_word;
                for &q in idx {
                    p.set_letter(q, letters[c % 3]);
                    c /= 3;
                }
                if syndrome_of(code, &p).is_zero() && !ech.reduce(&p.x_bits().concat(p.z_bits())).is_zero() {
                    found = true;
                    return false;
                }
            }
            true
        });
        if found {
            return Distance::Exact(w);
        }
    }
    Distance::AtLeast(w_max + 1)
}

/// One term `λ (I − Q)/2` of the code Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianTerm {
    pub lambda: f64,
    pub check: PauliString,
}

/// The terms of `H₀ = Σ_Q λ_Q (I − Q)/2`.
#[must_use]
pub fn hamiltonian_description(code: &StabilizerCode) -> Vec<HamiltonianTerm> {
    code.checks
        .iter()
        .zip(&code.lambdas)
        .map(|(c, &lambda)| HamiltonianTerm {
            lambda,
            check: c.clone(),
        })
        .collect()
}
