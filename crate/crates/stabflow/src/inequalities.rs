//! Numeric checks of the operator-norm inequalities behind the iteration:
//! block projections contract, the generator is bounded by the
//! off-diagonal part, commutators and conjugations stay quasi-local.

use serde::Serialize;

use crate::operator::{expm_anti_hermitian, PauliSum};
use crate::swt::{
    block_split, commutator_structured, decompose, kappa_norm, patch_norm, solve_generator, split_blocks, CodeContext,
    QuasiLocalOperator, SwtError, PAULI_TOL,
};

/// Relative slack allowed for inequalities that can hold with equality.
pub const REL_SLACK: f64 = 1e-12;

/// One instance of `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub holds: bool,
}

impl InequalityCheck {
    #[must_use]
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: lhs <= rhs + REL_SLACK * rhs.abs().max(f64::MIN_POSITIVE),
        }
    }
}

/// `‖ℙV_{S,s}‖ <= ‖V_{S,s}‖` and `‖ℙ⊥V_{S,s}‖ <= ‖V_{S,s}‖` for every term.
///
/// # Errors
///
/// Propagates patch-size failures.
pub fn projection_contraction(ctx: &CodeContext, v: &QuasiLocalOperator) -> Result<Vec<InequalityCheck>, SwtError> {
    let mut out = Vec::new();
    for t in v.terms() {
        let full = patch_norm(&t.payload, t.support)?;
        let (diag, off) = block_split(&t, ctx);
        out.push(InequalityCheck::new("diagonal part", patch_norm(&diag, t.support)?, full));
        out.push(InequalityCheck::new("off-diagonal part", patch_norm(&off, t.support)?, full));
    }
    Ok(out)
}

/// Per term `‖A_{S,s}‖ <= ‖ℙ⊥V_{S,s}‖/|s|`, and `‖A‖_κ <= ‖ℙ⊥V‖_κ`.
///
/// # Errors
///
/// Propagates generator and patch-size failures.
pub fn generator_bounds(ctx: &CodeContext, v: &QuasiLocalOperator, kappa: f64) -> Result<Vec<InequalityCheck>, SwtError> {
    let a = solve_generator(ctx, v)?;
    let (_, off) = split_blocks(v, ctx);
    let mut out = Vec::new();
    for t in a.terms() {
        let off_term = off
            .terms()
            .find(|o| o.support == t.support && o.syndrome == t.syndrome)
            .map(|o| o.payload)
            .unwrap_or_else(|| PauliSum::zero(ctx.n()));
        let weight = t.syndrome.iter_ones().count() as f64;
        out.push(InequalityCheck::new(
            "generator term",
            patch_norm(&t.payload, t.support)?,
            patch_norm(&off_term, t.support)? / weight,
        ));
    }
    out.push(InequalityCheck::new("generator kappa norm", kappa_norm(&a, kappa)?, kappa_norm(&off, kappa)?));
    Ok(out)
}

/// `‖[D, A]‖_{κ−δκ} <= (2/δκ) ‖D‖_κ ‖A‖_κ` with `[D, A]` grouped by
/// `(S ∪ S′, s + s′)`.
///
/// # Errors
///
/// Propagates patch-size failures.
pub fn commutator_bound(d: &QuasiLocalOperator, a: &QuasiLocalOperator, kappa: f64, delta_kappa: f64) -> Result<InequalityCheck, SwtError> {
    let c = commutator_structured(d, a);
    let lhs = kappa_norm(&c, kappa - delta_kappa)?;
    let rhs = 2.0 / delta_kappa * kappa_norm(d, kappa)? * kappa_norm(a, kappa)?;
    Ok(InequalityCheck::new("commutator", lhs, rhs))
}

/// Whether `‖A‖_κ <= δκ/3`, the hypothesis of [`cluster_expansion_bounds`].
///
/// # Errors
///
/// Propagates patch-size failures.
pub fn generator_small(a: &QuasiLocalOperator, kappa: f64, delta_kappa: f64) -> Result<bool, SwtError> {
    Ok(kappa_norm(a, kappa)? <= delta_kappa / 3.0)
}

/// With `κ′ = κ − δκ` and the exact conjugation `e^{−A} O e^{A}`
/// decomposed canonically:
/// `‖(e^{−𝒜} − 1)O‖_{κ′} <= 18/(κ′δκ) ‖A‖_κ ‖O‖_κ` and
/// `‖e^{−𝒜}O‖_{κ′} <= (1 + 18‖A‖_κ/(κ′δκ)) ‖O‖_κ`.
///
/// # Errors
///
/// Propagates decomposition and patch-size failures.
pub fn cluster_expansion_bounds(
    ctx: &CodeContext,
    a: &QuasiLocalOperator,
    o: &QuasiLocalOperator,
    kappa: f64,
    delta_kappa: f64,
) -> Result<[InequalityCheck; 2], SwtError> {
    let kp = kappa - delta_kappa;
    let exp_a = expm_anti_hermitian(&a.total().to_dense());
    let o_dense = o.total().to_dense();
    let rotated = exp_a.adjoint() * &o_dense * &exp_a;
    let n = ctx.n();
    let diff = PauliSum::from_dense(&(&rotated - &o_dense), n, PAULI_TOL);
    let whole = PauliSum::from_dense(&rotated, n, PAULI_TOL);
    let a_k = kappa_norm(a, kappa)?;
    let o_k = kappa_norm(o, kappa)?;
    let factor = 18.0 / (kp * delta_kappa);
    Ok([
        InequalityCheck::new("conjugation change", kappa_norm(&decompose(&diff, ctx)?, kp)?, factor * a_k * o_k),
        InequalityCheck::new("conjugation", kappa_norm(&decompose(&whole, ctx)?, kp)?, (1.0 + factor * a_k) * o_k),
    ])
}
