//! Check soundness and check expansion of concrete codes, and the growth
//! sums that feed the stability constants.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::code::{pauli_from_symplectic, CodeGraphMetrics, CodeKind, Sector, StabilizerCode};
use crate::gf2::{self, binomial, BitVector};
use crate::pauli::PauliString;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SoundnessError {
    #[error("{0} is not an element of the stabilizer group")]
    NotAStabilizer(String),
    #[error("operator acts on {found} qubits, code has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid soundness function: {0}")]
    BadFunction(String),
    #[error("growth sum does not converge: {0}")]
    NonConvergent(String),
}

/// Minimal set of checks multiplying to a stabilizer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expansion {
    pub count: usize,
    pub checks: Vec<usize>,
}

/// Exact minimal number of checks whose product is `stab`, sign included.
///
/// Returns `Ok(None)` when the minimum exceeds `cap`.
///
/// # Errors
///
/// Returns [`SoundnessError::NotAStabilizer`] if `stab` is not generated by
/// the checks, including when only `-stab` is.
pub fn min_expansion(code: &StabilizerCode, stab: &PauliString, cap: usize) -> Result<Option<Expansion>, SoundnessError> {
    if stab.n() != code.n() {
        return Err(SoundnessError::LengthMismatch {
            expected: code.n(),
            found: stab.n(),
        });
    }
    let a = code.check_matrix();
    let b = stab.x_bits().concat(stab.z_bits());
    let not_stab = || SoundnessError::NotAStabilizer(stab.to_string());
    let sol = gf2::solve_affine(&a, &b).expect("lengths agree").ok_or_else(not_stab)?;
    let idx: Vec<usize> = sol.particular.iter_ones().collect();
    if code.product_of(&idx).is_negative() != stab.is_negative() {
        return Err(not_stab());
    }
    Ok(gf2::min_support_solution(&a, &b, cap)
        .expect("lengths agree")
        .map(|m| Expansion {
            count: m.weight,
            checks: m.solution.iter_ones().collect(),
        }))
}

/// Breadth-first search over the group generated by `gens`; each element
/// is mapped to the fewest generators multiplying to it. Returns `None` if
/// the group has more than `budget` elements.
#[must_use]
pub fn group_distances(gens: &[BitVector], len: usize, budget: usize) -> Option<HashMap<BitVector, u32>> {
    let mut dist = HashMap::new();
    let id = BitVector::zeros(len);
    dist.insert(id.clone(), 0u32);
    let mut queue = VecDeque::from([id]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for g in gens {
            let v = u.xor(g);
            if !dist.contains_key(&v) {
                if dist.len() >= budget {
                    return None;
                }
                dist.insert(v.clone(), d + 1);
                queue.push_back(v);
            }
        }
    }
    Some(dist)
}

/// One row of a soundness profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    #[serde(rename = "M")]
    pub m: usize,
    /// Running maximum of the minimal expansion over weights `<= M`.
    pub f_emp: usize,
    /// Worst stabilizer attaining `f_emp`.
    pub witness: Option<String>,
    pub certified: bool,
    /// Worst minimal expansion at weight exactly `M`, if any stabilizer has it.
    #[serde(skip)]
    pub at_weight: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    /// Every element of the stabilizer group was visited.
    FullGroup,
    /// X and Z sectors visited separately and combined as `2 max(f_X, f_Z)`.
    SectorWise,
    /// Random products of checks; a lower estimate, not a certificate.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoundnessProfile {
    pub m_max: usize,
    pub mode: ProfileMode,
    pub certified: bool,
    pub rows: Vec<ProfileRow>,
    /// Per-sector profiles of CSS and classical codes, when enumerable.
    pub x_sector: Option<Vec<ProfileRow>>,
    pub z_sector: Option<Vec<ProfileRow>>,
}

impl SoundnessProfile {
    /// `f_emp(M)`, saturating at `m_max`.
    #[must_use]
    pub fn f(&self, m: usize) -> usize {
        self.rows[m.min(self.m_max)].f_emp
    }
}

/// Worst minimal expansion per weight from a distance table.
fn rows_from_distances(
    dist: &HashMap<BitVector, u32>,
    m_max: usize,
    certified: bool,
    weight_of: impl Fn(&BitVector) -> usize,
    witness_of: impl Fn(&BitVector) -> String,
) -> Vec<ProfileRow> {
    let mut worst: Vec<Option<(usize, &BitVector)>> = vec![None; m_max + 1];
    for (v, &d) in dist {
        let w = weight_of(v);
        if w > m_max {
            continue;
        }
        let d = d as usize;
        let replace = match worst[w] {
            None => true,
            Some((bd, bv)) => d > bd || (d == bd && v < bv),
        };
        if replace {
            worst[w] = Some((d, v));
        }
    }
    envelope(
        worst
            .into_iter()
            .map(|o| o.map(|(d, v)| (d, witness_of(v))))
            .collect(),
        certified,
    )
}

/// Turn per-weight maxima into monotone rows.
fn envelope(per_weight: Vec<Option<(usize, String)>>, certified: bool) -> Vec<ProfileRow> {
    let mut rows = Vec::with_capacity(per_weight.len());
    let mut best: (usize, Option<String>) = (0, None);
    for (m, entry) in per_weight.into_iter().enumerate() {
        let at_weight = entry.as_ref().map(|(d, _)| *d);
        if let Some((d, w)) = entry {
            if best.1.is_none() || d > best.0 {
                best = (d, Some(w));
            }
        }
        rows.push(ProfileRow {
            m,
            f_emp: best.0,
            witness: best.1.clone(),
            certified,
            at_weight,
        });
    }
    rows
}

fn signed_witness(code: &StabilizerCode, v: &BitVector) -> String {
    let p = pauli_from_symplectic(v);
    let sol = gf2::solve_affine(&code.check_matrix(), v)
        .expect("lengths agree")
        .expect("group element is generated by checks");
    let idx: Vec<usize> = sol.particular.iter_ones().collect();
    p.with_sign(code.product_of(&idx).is_negative()).to_string()
}

fn sector_rows(code: &StabilizerCode, sector: Sector, m_max: usize, budget: usize) -> Option<Vec<ProfileRow>> {
    let h = code.sector_matrix(sector);
    let r = gf2::rank(&h);
    if r >= 63 || (1usize << r) > budget {
        return None;
    }
    let dist = group_distances(h.rows(), code.n(), budget)?;
    Some(rows_from_distances(&dist, m_max, true, BitVector::weight, |v| {
        sector.pauli(v.clone()).to_string()
    }))
}

/// Worst-case minimal check expansion for each stabilizer weight `M <= m_max`.
///
/// The full group is enumerated when it has at most `budget` elements. CSS
/// codes fall back to sector-wise enumeration, combined as `2 max(f_X, f_Z)`.
/// Otherwise `samples` random check products are examined and the profile is
/// marked as not certified.
#[must_use]
pub fn soundness_profile(code: &StabilizerCode, m_max: usize, budget: usize, samples: usize, seed: u64) -> SoundnessProfile {
    let n = code.n();
    let (x_sector, z_sector) = if code.kind() == CodeKind::General {
        (None, None)
    } else {
        (
            sector_rows(code, Sector::X, m_max, budget),
            sector_rows(code, Sector::Z, m_max, budget),
        )
    };
    let rank = code.rank();
    if rank < usize::BITS as usize - 1 && (1usize << rank) <= budget {
        if let Some(dist) = group_distances(code.check_matrix().rows(), 2 * n, budget) {
            let weight = |v: &BitVector| v.slice(0, n).or(&v.slice(n, 2 * n)).weight();
            let rows = rows_from_distances(&dist, m_max, true, weight, |v| signed_witness(code, v));
            return SoundnessProfile {
                m_max,
                mode: ProfileMode::FullGroup,
                certified: true,
                rows,
                x_sector,
                z_sector,
            };
        }
    }
    if let (Some(xs), Some(zs)) = (&x_sector, &z_sector) {
        let per_weight = (0..=m_max)
            .map(|m| {
                let (fx, fz) = (&xs[m], &zs[m]);
                let pick = if fx.f_emp >= fz.f_emp { fx } else { fz };
                Some((2 * pick.f_emp, pick.witness.clone().unwrap_or_default()))
            })
            .collect();
        return SoundnessProfile {
            m_max,
            mode: ProfileMode::SectorWise,
            certified: true,
            rows: envelope(per_weight, true),
            x_sector,
            z_sector,
        };
    }
    let m = code.num_checks();
    let found: Vec<(usize, usize, String)> = (0..samples as u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let idx: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
            let p = code.product_of(&idx);
            let w = p.weight();
            if w > m_max {
                return None;
            }
            let e = min_expansion(code, &p, m).ok()??;
            Some((w, e.count, p.to_string()))
        })
        .collect();
    let mut per_weight: Vec<Option<(usize, String)>> = vec![None; m_max + 1];
    per_weight[0] = Some((0, PauliString::identity(n).to_string()));
    for (w, c, s) in found {
        if per_weight[w].as_ref().is_none_or(|(b, bs)| c > *b || (c == *b && s < *bs)) {
            per_weight[w] = Some((c, s));
        }
    }
    SoundnessProfile {
        m_max,
        mode: ProfileMode::Sampled,
        certified: false,
        rows: envelope(per_weight, false),
        x_sector,
        z_sector,
    }
}

/// Smallest observed ratio of product weight to subset size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionProfile {
    pub size_max: usize,
    pub eta_emp: f64,
    pub witness: Vec<usize>,
    pub certified: bool,
}

/// Subsets enumerated exhaustively up to this many.
pub const EXACT_SUBSET_LIMIT: f64 = 1e6;

/// Check expansion `min |supp(∏_{C∈T} Q_C)| / |T|` over subsets `T` of at
/// most `size_max` checks, exhaustive when there are at most
/// [`EXACT_SUBSET_LIMIT`] subsets, otherwise over `samples` seeded draws.
///
/// # Panics
///
/// Panics if `size_max == 0`.
#[must_use]
pub fn expansion_profile(code: &StabilizerCode, size_max: usize, samples: usize, seed: u64) -> ExpansionProfile {
    assert!(size_max >= 1, "size_max must be at least 1");
    let m = code.num_checks();
    let size_max = size_max.min(m);
    let total: f64 = (1..=size_max).map(|s| binomial(m, s)).sum();
    let mut best = (f64::INFINITY, Vec::new());
    let mut consider = |idx: &[usize]| {
        let w = code.product_of(idx).weight() as f64 / idx.len() as f64;
        if w < best.0 {
            best = (w, idx.to_vec());
        }
    };
    let certified = total <= EXACT_SUBSET_LIMIT;
    if certified {
        for s in 1..=size_max {
            gf2::for_each_subset(m, s, |idx| {
                consider(idx);
                true
            });
        }
    } else {
        for i in 0..samples as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let s = rng.gen_range(1..=size_max);
            let idx = rand::seq::index::sample(&mut rng, m, s).into_vec();
            let mut idx = idx;
            idx.sort_unstable();
            consider(&idx);
        }
    }
    ExpansionProfile {
        size_max,
        eta_emp: if best.0.is_finite() { best.0 } else { 0.0 },
        witness: best.1,
        certified,
    }
}

/// `f(M) = c_f M^{2−β}` with weight cutoff `d_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SoundnessFunction {
    pub c_f: f64,
    pub beta: f64,
    /// `None` means no cutoff.
    pub d_c: Option<f64>,
}

impl SoundnessFunction {
    /// # Errors
    ///
    /// Rejects `c_f <= 0` and `β > 1` or non-finite parameters.
    pub fn new(c_f: f64, beta: f64, d_c: Option<f64>) -> Result<Self, SoundnessError> {
        if !(c_f > 0.0 && c_f.is_finite()) {
            return Err(SoundnessError::BadFunction(format!("c_f = {c_f} must be positive")));
        }
        if !(beta <= 1.0 && beta.is_finite()) {
            return Err(SoundnessError::BadFunction(format!("β = {beta} must be at most 1")));
        }
        Ok(Self { c_f, beta, d_c })
    }

    #[must_use]
    pub fn eval(&self, m: f64) -> f64 {
        self.c_f * m.powf(2.0 - self.beta)
    }

    #[must_use]
    pub fn inverse(&self, y: f64) -> f64 {
        (y / self.c_f).powf(1.0 / (2.0 - self.beta))
    }

    fn below_cutoff(&self, x: f64) -> bool {
        self.d_c.is_none_or(|d| x < d)
    }
}

/// `f̃(r)` from `f̃(1) = f⁻¹(1)` and
/// `f̃(r+1) = f⁻¹[f(f̃(r)) + min(d_c, f̃(r))/Δ]`, with `f̃(0) = 0`.
///
/// # Panics
///
/// Panics if `delta == 0`.
#[must_use]
pub fn tilde_f_eval(f: &SoundnessFunction, delta: usize, r: usize) -> f64 {
    tilde_f_sequence(f, delta, r)[r]
}

/// `[f̃(0), …, f̃(r_max)]`.
///
/// # Panics
///
/// Panics if `delta == 0`.
#[must_use]
pub fn tilde_f_sequence(f: &SoundnessFunction, delta: usize, r_max: usize) -> Vec<f64> {
    assert!(delta >= 1, "Δ must be at least 1");
    let mut out = vec![0.0];
    if r_max == 0 {
        return out;
    }
    let mut t = f.inverse(1.0);
    out.push(t);
    for _ in 1..r_max {
        let step = f.d_c.map_or(t, |d| d.min(t)) / delta as f64;
        t = f.inverse(f.eval(t) + step);
        out.push(t);
    }
    out
}

/// Growth data for [`soundness_sum`].
#[derive(Clone, Copy, Debug)]
pub enum Growth<'a> {
    /// `γ(r) <= Δ^r`.
    Envelope { delta: usize },
    /// Measured shells `max_i γ_i(r)` of a code graph.
    Graph(&'a CodeGraphMetrics),
}

impl Growth<'_> {
    fn delta(&self) -> usize {
        match self {
            Self::Envelope { delta } => *delta,
            Self::Graph(g) => g.delta,
        }
    }

    fn ln_shell(&self, r: usize) -> f64 {
        match self {
            Self::Envelope { delta } => r as f64 * (*delta as f64).ln(),
            Self::Graph(g) => (g.max_shell(r) as f64).ln(),
        }
    }
}

/// Constants of the expander growth bound
/// `Σ_r γ(r) e^{−δκ f̃(r)} <= c_f″ e^{c_f′ δκ^{−α}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthConstants {
    /// β used for the constants; `β = 1` is replaced by 0.9.
    pub beta_eff: f64,
    pub alpha: f64,
    pub c_tilde_f: f64,
    pub c_tilde_f_prime: f64,
    pub c_f_prime: f64,
    pub c_f_dblprime: f64,
}

/// β substituted for linear soundness, which the constants cannot use directly.
pub const LINEAR_BETA_SUBSTITUTE: f64 = 0.9;

impl GrowthConstants {
    /// Constants for growth bounded by `Δ^r`.
    ///
    /// `f̃(r) >= c̃_f r^{1/(1−β)}` with `c̃_f = (c_g/c_f)^{1/(2−β)}` where
    /// `((2−β)/(1−β)) c_g^{(1−β)/(2−β)} = c_f^{−1/(2−β)}/Δ`; terms past
    /// `2 r_max` shrink by at least `1 − c̃_f′ = Δ^{1 − 2^{β/(1−β)}}` per step,
    /// and `c_f″ = sup_{x>=0} (2x + 1/c̃_f′) e^{−β x ln Δ}`.
    ///
    /// # Errors
    ///
    /// Rejects `β <= 0` and `Δ < 2`.
    pub fn expander(f: &SoundnessFunction, delta: usize) -> Result<Self, SoundnessError> {
        let beta = if f.beta >= 1.0 { LINEAR_BETA_SUBSTITUTE } else { f.beta };
        if beta <= 0.0 {
            return Err(SoundnessError::NonConvergent(format!(
                "β = {} <= 0 with a Δ^r envelope: e^(r ln Δ) is not beaten by e^(-δκ f̃(r))",
                f.beta
            )));
        }
        if delta < 2 {
            return Err(SoundnessError::NonConvergent(format!("Δ = {delta} gives no growth constant")));
        }
        let ln_d = (delta as f64).ln();
        let two_b = 2.0 - beta;
        let one_b = 1.0 - beta;
        let c_g = (f.c_f.powf(-1.0 / two_b) * one_b / (delta as f64 * two_b)).powf(two_b / one_b);
        let c_tilde_f = (c_g / f.c_f).powf(1.0 / two_b);
        let alpha = one_b / beta;
        let c_f_prime = 2.0 * beta * ln_d * (one_b * ln_d / c_tilde_f).powf(alpha);
        let c_tilde_f_prime = 1.0 - (delta as f64).powf(1.0 - 2f64.powf(beta / one_b));
        let a = 1.0 / c_tilde_f_prime;
        let b = beta * ln_d;
        let x_star = 1.0 / b - a / 2.0;
        let c_f_dblprime = if x_star <= 0.0 {
            a
        } else {
            (2.0 * x_star + a) * (-b * x_star).exp()
        };
        Ok(Self {
            beta_eff: beta,
            alpha,
            c_tilde_f,
            c_tilde_f_prime,
            c_f_prime,
            c_f_dblprime,
        })
    }

    /// `r_max = ((1−β) ln Δ / (c̃_f δκ))^{(1−β)/β}`, where the summand peaks.
    #[must_use]
    pub fn r_max(&self, delta: usize, delta_kappa: f64) -> f64 {
        ((1.0 - self.beta_eff) * (delta as f64).ln() / (self.c_tilde_f * delta_kappa)).powf(self.alpha)
    }

    /// `c_f″ e^{c_f′ δκ^{−α}}`.
    #[must_use]
    pub fn bound(&self, delta_kappa: f64) -> f64 {
        self.c_f_dblprime * (self.c_f_prime * delta_kappa.powf(-self.alpha)).exp()
    }
}

/// Exponent and `c_f′` of the finite-dimensional growth bound, where
/// `γ(r) <= c_D r^{D−1}`: `α = 1−β` and `c_f′ = ((1−β)(D−1)/c̃_f)^{1−β}`.
#[must_use]
pub fn finite_dimension_exponent(beta: f64, dim: f64, c_tilde_f: f64) -> (f64, f64) {
    let alpha = 1.0 - beta;
    (alpha, ((1.0 - beta) * (dim - 1.0) / c_tilde_f).powf(alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SoundnessSum {
    pub sum: f64,
    pub bound: f64,
    pub holds: bool,
    pub terms: usize,
    pub constants: GrowthConstants,
}

/// Hard stop on the number of shells summed.
const MAX_SHELLS: usize = 1_000_000;

/// Evaluate `Σ_{r>=0, f̃(r)<d_c} γ(r) e^{−δκ f̃(r)}` and compare it with
/// `c_f″ e^{c_f′ δκ^{−α}}`.
///
/// Without a cutoff the envelope sum stops once past the peak and the next
/// term is below `1e-17` of the running sum.
///
/// # Errors
///
/// Rejects `δκ <= 0` and configurations where the bound has no finite
/// constants (see [`GrowthConstants::expander`]).
pub fn soundness_sum(f: &SoundnessFunction, delta_kappa: f64, growth: Growth<'_>) -> Result<SoundnessSum, SoundnessError> {
    if !(delta_kappa > 0.0) {
        return Err(SoundnessError::BadFunction(format!("δκ = {delta_kappa} must be positive")));
    }
    let delta = growth.delta();
    let constants = GrowthConstants::expander(f, delta)?;
    let r_peak = constants.r_max(delta, delta_kappa);
    let mut sum = 1.0;
    let mut t = 0.0;
    let mut terms = 1;
    for r in 1..MAX_SHELLS {
        t = if r == 1 {
            f.inverse(1.0)
        } else {
            let step = f.d_c.map_or(t, |d| d.min(t)) / delta as f64;
            f.inverse(f.eval(t) + step)
        };
        if !f.below_cutoff(t) {
            break;
        }
        if let Growth::Graph(g) = growth {
            if r > g.diameter() {
                break;
            }
        }
        let term = (growth.ln_shell(r) - delta_kappa * t).exp();
        sum += term;
        terms += 1;
        if (r as f64) > 2.0 * r_peak && term < 1e-17 * sum {
            break;
        }
    }
    let bound = constants.bound(delta_kappa);
    Ok(SoundnessSum {
        sum,
        bound,
        holds: sum <= bound,
        terms,
        constants,
    })
}
