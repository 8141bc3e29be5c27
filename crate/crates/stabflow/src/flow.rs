//! Bound machinery for the iterated Schrieffer–Wolff flow: the κ schedule,
//! the norm recursions, the iteration constants, the stopping order and the
//! resulting spectral certificate.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid constants: {0}")]
    BadConstants(String),
    #[error("no feasible ε₀ above {floor:e}: best candidate {best:e} with c_iter = {c_iter:e}")]
    Infeasible { best: f64, floor: f64, c_iter: f64 },
    #[error("c_iter ε = {0} >= 1: the flow does not contract, no stopping order")]
    NoStoppingOrder(f64),
}

/// `κ_m = (κ₁/2)(1 + 1/(1 + ln m))`.
///
/// # Panics
///
/// Panics if `m == 0`.
#[must_use]
pub fn kappa_m(kappa1: f64, m: usize) -> f64 {
    assert!(m >= 1, "orders start at 1");
    0.5 * kappa1 * (1.0 + 1.0 / (1.0 + (m as f64).ln()))
}

/// `(δκ_m, δκ̃_m) = (κ_m − κ_{m+1}, κ_m − κ_{2m})`.
#[must_use]
pub fn delta_kappas(kappa1: f64, m: usize) -> (f64, f64) {
    let k = kappa_m(kappa1, m);
    (k - kappa_m(kappa1, m + 1), k - kappa_m(kappa1, 2 * m))
}

/// `δκ_m`.
#[must_use]
pub fn delta_kappa(kappa1: f64, m: usize) -> f64 {
    delta_kappas(kappa1, m).0
}

/// `δκ̃_m`.
#[must_use]
pub fn delta_kappa_tilde(kappa1: f64, m: usize) -> f64 {
    delta_kappas(kappa1, m).1
}

/// Constants entering the flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowConstants {
    pub kappa1: f64,
    /// Graph degree Δ; carried for reporting.
    pub delta: usize,
    pub c_f_prime: f64,
    pub c_f_dblprime: f64,
    pub alpha: f64,
    /// `c̃_f″ >= 2`.
    pub c_tilde_f_dblprime: f64,
}

impl FlowConstants {
    /// # Errors
    ///
    /// Rejects `κ₁ <= 0`, `α <= 0`, `c̃_f″ < 2` and non-finite values.
    pub fn validate(&self) -> Result<(), FlowError> {
        let finite = [
            self.kappa1,
            self.c_f_prime,
            self.c_f_dblprime,
            self.alpha,
            self.c_tilde_f_dblprime,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(FlowError::BadConstants("non-finite constant".into()));
        }
        if self.kappa1 <= 0.0 {
            return Err(FlowError::BadConstants(format!("κ₁ = {} must be positive", self.kappa1)));
        }
        if self.alpha <= 0.0 {
            return Err(FlowError::BadConstants(format!("α = {} must be positive", self.alpha)));
        }
        if self.c_tilde_f_dblprime < 2.0 {
            return Err(FlowError::BadConstants(format!(
                "c̃_f″ = {} must be at least 2",
                self.c_tilde_f_dblprime
            )));
        }
        Ok(())
    }

    /// `c̃_f″ e^{c_f′ (δκ̃_m)^{−α}}`.
    fn growth_factor(&self, m: usize) -> f64 {
        self.c_tilde_f_dblprime * (self.c_f_prime * delta_kappa_tilde(self.kappa1, m).powf(-self.alpha)).exp()
    }
}

/// Norm bookkeeping at order `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowState {
    pub m: usize,
    pub kappa_m: f64,
    pub v: f64,
    pub v_tilde: f64,
    pub d: f64,
    pub d_tilde: f64,
    /// `v_1, …, v_m`.
    pub v_history: Vec<f64>,
}

impl FlowState {
    /// `v₁ = ṽ₁ = ε`, `𝕕₁ = 𝕕̃₁ = 0`.
    #[must_use]
    pub fn initial(kappa1: f64, epsilon: f64) -> Self {
        Self {
            m: 1,
            kappa_m: kappa1,
            v: epsilon,
            v_tilde: epsilon,
            d: 0.0,
            d_tilde: 0.0,
            v_history: vec![epsilon],
        }
    }
}

/// `𝕕̃_m = 2 Σ_{m′=⌊m/2⌋+1}^{m−1} v_{m′}` from `history = [v_1, …]`.
fn window_sum(history: &[f64], m: usize) -> f64 {
    2.0 * (m / 2 + 1..m).map(|j| history[j - 1]).fold(0.0, |a, b| a + b)
}

/// Advance the recursions one order, taking every inequality as equality:
///
/// ```text
/// T       = 9/(κ_{m+1} δκ_m) ṽ_m (3 v_m + (4/δκ_m) ṽ_m (𝕕_m + 𝕕̃_m))
/// v_{m+1} = 𝕕_m ṽ_m/δκ_m + 𝕕̃_m ṽ_m/δκ_m + T
/// ṽ_{m+1} = 𝕕_m ṽ_m      + 𝕕̃_m ṽ_m/δκ_m + T
/// 𝕕_{m+1} = 𝕕_m + [m odd] c̃_f″ e^{c_f′ (δκ̃_{(m+1)/2})^{−α}} v_{(m+1)/2}
/// ```
#[must_use]
pub fn flow_step(state: &FlowState, consts: &FlowConstants) -> FlowState {
    let m = state.m;
    let k1 = consts.kappa1;
    let dk = delta_kappa(k1, m);
    let kappa_next = kappa_m(k1, m + 1);
    let (v, vt, d, dt) = (state.v, state.v_tilde, state.d, state.d_tilde);
    let tail = 9.0 / (kappa_next * dk) * vt * (3.0 * v + 4.0 / dk * vt * (d + dt));
    let v_next = d * vt / dk + dt * vt / dk + tail;
    let vt_next = d * vt + dt * vt / dk + tail;
    let d_next = if m % 2 == 1 {
        let half = m.div_ceil(2);
        d + consts.growth_factor(half) * state.v_history[half - 1]
    } else {
        d
    };
    let mut v_history = state.v_history.clone();
    v_history.push(v_next);
    let d_tilde_next = window_sum(&v_history, m + 1);
    FlowState {
        m: m + 1,
        kappa_m: kappa_next,
        v: v_next,
        v_tilde: vt_next,
        d: d_next,
        d_tilde: d_tilde_next,
        v_history,
    }
}

/// States for orders `1..=m_max`.
#[must_use]
pub fn run_flow(consts: &FlowConstants, epsilon: f64, m_max: usize) -> Vec<FlowState> {
    let mut out = vec![FlowState::initial(consts.kappa1, epsilon)];
    while out.len() < m_max {
        let next = flow_step(out.last().expect("non-empty"), consts);
        out.push(next);
    }
    out
}

/// `c_iter` together with where its series was cut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterConstant {
    pub c_iter: f64,
    /// Last index `m` included in the series.
    pub truncated_at: usize,
    /// First argument of the max: `(3c̃_f″/2)(…)`.
    pub series_branch: f64,
    /// Second argument: `27/(κ₂ δκ₁) max(1, δκ₁)`.
    pub leading_branch: f64,
}

/// Relative size below which series terms are dropped.
pub const SERIES_REL_TOL: f64 = 1e-12;

/// `c_iter = max((3c̃_f″/2)(e^{c_f′ δκ̃₁^{−α}} + Σ_{m>=2} e^{c_f′ δκ̃_m^{−α}} 4^{1−m}/δκ_{m−1}),
/// 27/(κ₂ δκ₁) max(1, δκ₁))`.
///
/// The series stops at the first term that is both smaller than its
/// predecessor and below [`SERIES_REL_TOL`] of the partial sum.
///
/// # Errors
///
/// Propagates [`FlowConstants::validate`].
pub fn c_iter_const(consts: &FlowConstants) -> Result<IterConstant, FlowError> {
    consts.validate()?;
    let k1 = consts.kappa1;
    let ln4 = 4f64.ln();
    let exponent = |m: usize| consts.c_f_prime * delta_kappa_tilde(k1, m).powf(-consts.alpha);
    // Sum in scaled form to survive exponents beyond f64 range.
    let mut terms_ln = vec![exponent(1)];
    let mut m = 2;
    loop {
        let t = exponent(m) - (m as f64 - 1.0) * ln4 - delta_kappa(k1, m - 1).ln();
        terms_ln.push(t);
        let top = terms_ln.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let partial: f64 = terms_ln.iter().map(|x| (x - top).exp()).sum();
        let prev = terms_ln[terms_ln.len() - 2];
        if t < prev && (t - top).exp() < SERIES_REL_TOL * partial {
            break;
        }
        m += 1;
        if m > 1_000_000 {
            return Err(FlowError::BadConstants("c_iter series did not settle".into()));
        }
    }
    let top = terms_ln.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let series_ln = top + terms_ln.iter().map(|x| (x - top).exp()).sum::<f64>().ln();
    let series_branch = 1.5 * consts.c_tilde_f_dblprime * series_ln.exp();
    let dk1 = delta_kappa(k1, 1);
    let leading_branch = 27.0 / (kappa_m(k1, 2) * dk1) * dk1.max(1.0);
    Ok(IterConstant {
        c_iter: series_branch.max(leading_branch),
        truncated_at: m,
        series_branch,
        leading_branch,
    })
}

/// Left side of the per-order smallness condition on `ε₀`:
/// `3/(δκ_m δκ_{m−1}) (cε₀)^{⌊m/2⌋} + 9/(κ_{m+1} δκ_m) (cε₀)^{m−1}
/// (3/δκ_{m−1} + (4ε₀/δκ_m)((2/3)c + 3/δκ_{m−1}))`.
#[must_use]
pub fn order_condition_lhs(kappa1: f64, c_iter: f64, eps0: f64, m: usize) -> f64 {
    let x = c_iter * eps0;
    let dk = delta_kappa(kappa1, m);
    let dk_prev = delta_kappa(kappa1, m - 1);
    3.0 / (dk * dk_prev) * x.powi((m / 2) as i32)
        + 9.0 / (kappa_m(kappa1, m + 1) * dk)
            * x.powi((m - 1) as i32)
            * (3.0 / dk_prev + 4.0 * eps0 / dk * (2.0 / 3.0 * c_iter + 3.0 / dk_prev))
}

/// Right side `(c_iter/3) min(1, 1/δκ₂)`.
#[must_use]
pub fn order_condition_rhs(kappa1: f64, c_iter: f64) -> f64 {
    c_iter / 3.0 * (1.0 / delta_kappa(kappa1, 2)).min(1.0)
}

/// Result of the `ε₀` search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonZero {
    pub epsilon0: f64,
    pub c_iter: IterConstant,
    /// `min(1/(4 c_iter), δκ₁/3)`, approached from below.
    pub cap: f64,
    pub m_check: usize,
    /// Whether the condition's left side still decreases at `m_check`.
    pub tail_decreasing: bool,
}

/// Smallest `ε₀` accepted as feasible.
pub const EPSILON0_FLOOR: f64 = 1e-12;

/// Largest `ε₀ < min(1/(4c_iter), δκ₁/3)` satisfying the per-order
/// condition for every `2 <= m <= m_check`, by bisection.
///
/// # Errors
///
/// Returns [`FlowError::Infeasible`] (carrying the best candidate) when no
/// `ε₀ >= 1e-12` works, or propagates constant validation errors.
///
/// # Panics
///
/// Panics if `m_check < 2`.
pub fn epsilon_zero_search(consts: &FlowConstants, m_check: usize) -> Result<EpsilonZero, FlowError> {
    assert!(m_check >= 2, "m_check must be at least 2");
    let ci = c_iter_const(consts)?;
    let k1 = consts.kappa1;
    let c = ci.c_iter;
    let cap = (1.0 / (4.0 * c)).min(delta_kappa(k1, 1) / 3.0) * (1.0 - 1e-12);
    let rhs = order_condition_rhs(k1, c);
    let ok = |e: f64| (2..=m_check).all(|m| order_condition_lhs(k1, c, e, m) <= rhs);
    let eps0 = if ok(cap) {
        cap
    } else {
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if eps0 < EPSILON0_FLOOR {
        return Err(FlowError::Infeasible {
            best: eps0,
            floor: EPSILON0_FLOOR,
            c_iter: c,
        });
    }
    let tail_decreasing =
        order_condition_lhs(k1, c, eps0, m_check) <= order_condition_lhs(k1, c, eps0, m_check.max(3) - 1);
    Ok(EpsilonZero {
        epsilon0: eps0,
        c_iter: ci,
        cap,
        m_check,
        tail_decreasing,
    })
}

/// Largest observed `value / bound` for each bound along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    /// Name → (worst ratio, order where it occurs).
    pub worst: BTreeMap<String, (f64, usize)>,
    pub holds: bool,
}

/// Compare a trajectory against
/// `v_m <= ε(cε)^{m−1}/δκ_{m−1}`, `ṽ_m <= ε(cε)^{m−1}`, `𝕕_m <= (2/3)cε`,
/// `𝕕̃_m <= 3ε(cε)^{⌊m/2⌋}/δκ_{m−2}` and `ṽ_m <= δκ_m/3`, with relative
/// slack `rel_tol`.
///
/// The `𝕕̃` bound is applied from `m = 3`; at `m = 2` the window is empty
/// and `𝕕̃₂ = 0` is required exactly.
#[must_use]
pub fn check_lemma_bounds(traj: &[FlowState], kappa1: f64, c_iter: f64, epsilon: f64, rel_tol: f64) -> LemmaCheck {
    let mut worst: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let mut holds = true;
    let x = c_iter * epsilon;
    let mut record = |name: &str, value: f64, bound: f64, m: usize| {
        let ratio = if bound > 0.0 {
            value / bound
        } else if value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if value > bound * (1.0 + rel_tol) {
            holds = false;
        }
        let e = worst.entry(name.to_string()).or_insert((ratio, m));
        if ratio > e.0 {
            *e = (ratio, m);
        }
    };
    for s in traj {
        let m = s.m;
        record("v_tilde_below_delta_kappa", s.v_tilde, delta_kappa(kappa1, m) / 3.0, m);
        if m < 2 {
            continue;
        }
        let geo = x.powi((m - 1) as i32);
        record("v", s.v, epsilon / delta_kappa(kappa1, m - 1) * geo, m);
        record("v_tilde", s.v_tilde, epsilon * geo, m);
        record("d", s.d, 2.0 / 3.0 * c_iter * epsilon, m);
        if m == 2 {
            record("d_tilde", s.d_tilde, 0.0, m);
        } else {
            let bound = 3.0 * epsilon / delta_kappa(kappa1, m - 2) * x.powi((m / 2) as i32);
            record("d_tilde", s.d_tilde, bound, m);
        }
    }
    LemmaCheck { worst, holds }
}

/// Smallest `m*` with `(6 m*²/κ₁)(c_iter ε)^{m*−1} <= e^{−κ₁ d_s/2}`.
///
/// # Errors
///
/// Returns [`FlowError::NoStoppingOrder`] when `c_iter ε >= 1`.
pub fn stopping_order(kappa1: f64, c_iter: f64, epsilon: f64, d_s: usize) -> Result<usize, FlowError> {
    let x = c_iter * epsilon;
    if !(x < 1.0) {
        return Err(FlowError::NoStoppingOrder(x));
    }
    let target = -kappa1 * d_s as f64 / 2.0;
    let mut m = 1usize;
    loop {
        let lhs = (6.0 * (m * m) as f64 / kappa1).ln() + (m as f64 - 1.0) * x.ln();
        if lhs <= target || (x == 0.0 && m >= 2) {
            return Ok(m);
        }
        m += 1;
    }
}

/// Spectral statement obtained from the flow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub epsilon: f64,
    pub epsilon0: f64,
    pub c_iter: f64,
    pub m_star: Option<usize>,
    pub epsilon_star: f64,
    pub c1: f64,
    pub c2: f64,
    pub n: usize,
    pub d_s: usize,
    /// `[−ε*, ε*]`.
    pub low_interval: (f64, f64),
    /// `[1 − c₁ε − ε*, ∞)`, upper end stored as infinity.
    pub high_interval: (f64, f64),
    pub gap_lower_bound: f64,
    pub splitting_bound: f64,
    pub valid: bool,
    pub reasons: Vec<String>,
    /// Whether the `ε₀` condition was still decreasing at its last checked order.
    pub tail_decreasing: bool,
    /// Formula behind each reported constant.
    pub provenance: BTreeMap<String, String>,
}

/// `c₂ = 4 max(1, 6/κ₁)`.
#[must_use]
pub fn c2_const(kappa1: f64) -> f64 {
    4.0 * (6.0 / kappa1).max(1.0)
}

/// `ε* = c₂ n ε e^{−κ₁ d_s/2}`.
#[must_use]
pub fn epsilon_star(kappa1: f64, n: usize, d_s: usize, epsilon: f64) -> f64 {
    c2_const(kappa1) * n as f64 * epsilon * (-kappa1 * d_s as f64 / 2.0).exp()
}

/// Smallest `n` with `3 c₂ ε n^{1 − κ₁ c_d/2} <= 1/6`, i.e. `3ε* <= 1/6`
/// once `d_s = c_d ln n`. `None` unless `κ₁ c_d > 2`.
#[must_use]
pub fn smallest_valid_n(kappa1: f64, c_d: f64, epsilon: f64) -> Option<usize> {
    let p = kappa1 * c_d / 2.0 - 1.0;
    if p <= 0.0 {
        return None;
    }
    if epsilon <= 0.0 {
        return Some(1);
    }
    let n = (18.0 * c2_const(kappa1) * epsilon).powf(1.0 / p);
    Some(n.ceil().max(1.0) as usize)
}

/// Assemble the certificate for a code with `n` qubits and effective
/// distance `d_s`, perturbed at strength `ε`, with relative-boundedness
/// constant `c₁`.
///
/// # Errors
///
/// Propagates constant validation and infeasible-`ε₀` errors; failed
/// preconditions only mark the certificate invalid.
pub fn stability_certificate(
    consts: &FlowConstants,
    n: usize,
    d_s: usize,
    epsilon: f64,
    c1: f64,
    m_check: usize,
) -> Result<StabilityCertificate, FlowError> {
    let e0 = epsilon_zero_search(consts, m_check)?;
    let k1 = consts.kappa1;
    let c2 = c2_const(k1);
    let eps_star = epsilon_star(k1, n, d_s, epsilon);
    let mut reasons = Vec::new();
    let eps_cap = e0.epsilon0.min(1.0 / (3.0 * c1));
    if epsilon > eps_cap {
        reasons.push(format!("ε = {epsilon:e} exceeds min(ε₀, 1/(3c₁)) = {eps_cap:e}"));
    }
    if 3.0 * eps_star > 1.0 / 6.0 {
        reasons.push(format!("3ε* = {:e} exceeds 1/6", 3.0 * eps_star));
    }
    let m_star = stopping_order(k1, e0.c_iter.c_iter, epsilon, d_s).ok();
    if m_star.is_none() {
        reasons.push("c_iter ε >= 1".into());
    }
    let high_start = 1.0 - c1 * epsilon - eps_star;
    let provenance = BTreeMap::from([
        ("c2".into(), "4 max(1, 6/kappa1)".into()),
        ("epsilon_star".into(), "c2 n epsilon exp(-kappa1 d_s / 2)".into()),
        ("m_star".into(), "smallest m with (6 m^2/kappa1)(c_iter epsilon)^(m-1) <= exp(-kappa1 d_s/2)".into()),
        ("c_iter".into(), format!("series truncated at m = {}", e0.c_iter.truncated_at)),
        ("epsilon0".into(), format!("bisection over orders 2..={}", e0.m_check)),
        ("c1".into(), "input: relative bound of D against H0".into()),
        ("gap_lower_bound".into(), "1 - c1 epsilon - 2 epsilon_star".into()),
        ("splitting_bound".into(), "2 epsilon_star".into()),
    ]);
    Ok(StabilityCertificate {
        epsilon,
        epsilon0: e0.epsilon0,
        c_iter: e0.c_iter.c_iter,
        m_star,
        epsilon_star: eps_star,
        c1,
        c2,
        n,
        d_s,
        low_interval: (-eps_star, eps_star),
        high_interval: (high_start, f64::INFINITY),
        gap_lower_bound: high_start - eps_star,
        splitting_bound: 2.0 * eps_star,
        valid: reasons.is_empty(),
        reasons,
        tail_decreasing: e0.tail_decreasing,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_sum_is_empty_for_first_orders() {
        let h = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(window_sum(&h, 1), 0.0);
        assert_eq!(window_sum(&h, 2), 0.0);
        assert_eq!(window_sum(&h, 3), 2.0 * 2.0);
        assert_eq!(window_sum(&h, 5), 2.0 * (3.0 + 4.0));
    }

    #[test]
    fn constants_are_validated() {
        let c = FlowConstants {
            kappa1: 1.0,
            delta: 5,
            c_f_prime: 1.0,
            c_f_dblprime: 1.0,
            alpha: 1.0,
            c_tilde_f_dblprime: 1.5,
        };
        assert!(matches!(c_iter_const(&c), Err(FlowError::BadConstants(_))));
    }

    #[test]
    fn large_perturbation_has_no_stopping_order() {
        assert!(matches!(stopping_order(1.0, 10.0, 0.2, 10), Err(FlowError::NoStoppingOrder(_))));
    }
}
