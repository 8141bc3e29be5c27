//! Stabilizer codes, check soundness, and Schrieffer–Wolff flows for
//! weakly perturbed commuting-check Hamiltonians.

pub mod alist;
pub mod code;
pub mod constructors;
pub mod eigs;
pub mod flow;
pub mod gf2;
pub mod inequalities;
pub mod lto;
pub mod operator;
pub mod pauli;
pub mod perturbations;
pub mod soundness;
pub mod spectrum;
pub mod swt;
