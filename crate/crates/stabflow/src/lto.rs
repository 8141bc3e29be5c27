//! Local indistinguishability: whether `P_S̄ 𝒪 P_S̄ ∝ P_S̄` for every Pauli
//! `𝒪` supported in `S`.
//!
//! With `P_S̄` the projector onto the checks used, a Pauli that anticommutes
//! with one of them gives zero, and one that commutes with all of them gives
//! `𝒪 P_S̄`, which is proportional to `P_S̄` exactly when `±𝒪` lies in the
//! group they generate. The test is therefore symplectic and exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::code::{symplectic_matrix, StabilizerCode};
use crate::gf2::{for_each_subset, BitMatrix, BitVector, Echelon};
use crate::pauli::{Letter, PauliString};

/// Regions up to this size are enumerated exhaustively.
pub const EXHAUSTIVE_MAX: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LtoReport {
    pub holds: bool,
    /// Lowest-weight violating Pauli found.
    pub counterexample: Option<String>,
    pub tested: usize,
    pub exhaustive: bool,
    pub region: Vec<usize>,
    pub checks_used: Vec<usize>,
}

/// Qubits within graph distance `r` of `s`, where qubits sharing a check
/// are adjacent.
#[must_use]
pub fn neighbourhood(code: &StabilizerCode, s: &[usize], r: usize) -> Vec<usize> {
    let mut inside = vec![false; code.n()];
    for &q in s {
        inside[q] = true;
    }
    let supports: Vec<Vec<usize>> = code.checks().iter().map(PauliString::support).collect();
    for _ in 0..r {
        let mut next = inside.clone();
        for sup in &supports {
            if sup.iter().any(|&q| inside[q]) {
                for &q in sup {
                    next[q] = true;
                }
            }
        }
        inside = next;
    }
    (0..code.n()).filter(|&q| inside[q]).collect()
}

/// Checks whose support lies in `region`.
#[must_use]
pub fn checks_within(code: &StabilizerCode, region: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; code.n()];
    for &q in region {
        inside[q] = true;
    }
    (0..code.num_checks())
        .filter(|&c| code.checks()[c].support().iter().all(|&q| inside[q]))
        .collect()
}

/// Checks acting on at least one qubit of `s`.
#[must_use]
pub fn checks_touching(code: &StabilizerCode, s: &[usize]) -> Vec<usize> {
    (0..code.num_checks())
        .filter(|&c| s.iter().any(|&q| code.checks()[c].letter(q) != Letter::I))
        .collect()
}

/// Test with `S̄` the `r`-neighbourhood of `s`.
#[must_use]
pub fn local_indistinguishability_check(code: &StabilizerCode, s: &[usize], r: usize, samples: usize, seed: u64) -> LtoReport {
    let region = neighbourhood(code, s, r);
    let checks = checks_within(code, &region);
    let mut report = check_with_checks(code, s, &checks, samples, seed);
    report.region = region;
    report
}

/// Test against the projector onto an explicit list of checks.
#[must_use]
pub fn check_with_checks(code: &StabilizerCode, s: &[usize], checks: &[usize], samples: usize, seed: u64) -> LtoReport {
    let n = code.n();
    let used: Vec<PauliString> = checks.iter().map(|&c| code.checks()[c].clone()).collect();
    let group = Echelon::new(&symplectic_matrix(n, &used));
    let symplectic = |p: &PauliString| p.x_bits().concat(p.z_bits());
    let violates = |p: &PauliString| {
        if used.iter().any(|c| c.anticommutes(p).expect("same length")) {
            return false;
        }
        !group.reduce(&symplectic(p)).is_zero()
    };
    let exhaustive = s.len() <= EXHAUSTIVE_MAX;
    let mut tested = 0usize;
    let mut counterexample = None;
    if exhaustive {
        'outer: for w in 1..=s.len() {
            let mut found = None;
            for_each_subset(s.len(), w, |subset| {
                let qubits: Vec<usize> = subset.iter().map(|&i| s[i]).collect();
                for letters in 0..3usize.pow(w as u32) {
                    let p = pauli_on(n, &qubits, letters);
                    tested += 1;
                    if violates(&p) {
                        found = Some(p);
                        return false;
                    }
                }
                true
            });
            if let Some(p) = found {
                counterexample = Some(p);
                break 'outer;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let mut p = PauliString::identity(n);
            for &q in s {
                let l = [Letter::I, Letter::X, Letter::Y, Letter::Z][rng.gen_range(0..4)];
                p.set_letter(q, l);
            }
            tested += 1;
            if !p.is_identity_up_to_sign() && violates(&p) {
                counterexample = Some(p);
                break;
            }
        }
    }
    LtoReport {
        holds: counterexample.is_none(),
        counterexample: counterexample.map(|p| p.to_string()),
        tested,
        exhaustive,
        region: s.to_vec(),
        checks_used: checks.to_vec(),
    }
}

/// Pauli with letters `X, Y, Z` on `qubits`, selected by the base-3 digits
/// of `code`.
fn pauli_on(n: usize, qubits: &[usize], mut code: usize) -> PauliString {
    let mut p = PauliString::identity(n);
    for &q in qubits {
        p.set_letter(q, [Letter::X, Letter::Y, Letter::Z][code % 3]);
        code /= 3;
    }
    p
}

/// Whether `p` is, up to sign, a product of the code's checks.
#[must_use]
pub fn in_stabilizer_group(code: &StabilizerCode, p: &PauliString) -> bool {
    let m: BitMatrix = symplectic_matrix(code.n(), code.checks());
    let v: BitVector = p.x_bits().concat(p.z_bits());
    m.row_space_contains(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::repetition_code;

    #[test]
    fn repetition_code_distinguishes_by_a_single_z() {
        let code = repetition_code(7).unwrap();
        let r = local_indistinguishability_check(&code, &[3], 1, 0, 0);
        assert_eq!(r.region, vec![2, 3, 4]);
        assert_eq!(r.counterexample.as_deref(), Some("+IIIZIII"));
    }

    #[test]
    fn bare_region_exposes_single_qubit_operator() {
        let code = repetition_code(5).unwrap();
        let r = check_with_checks(&code, &[2], &[], 0, 0);
        assert!(!r.holds);
        assert_eq!(r.counterexample.as_deref(), Some("+IIXII"));
    }
}
