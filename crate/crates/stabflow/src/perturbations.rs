//! Perturbation families used by the experiments. Every family has unit
//! strength; callers scale by ε.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constructors::ToricLattice;
use crate::operator::PauliSum;
use crate::pauli::{Letter, PauliString};

/// `Σ_i σ_i` with `σ` the given letter on every qubit.
#[must_use]
pub fn uniform_field(n: usize, letter: Letter) -> PauliSum {
    let mut v = PauliSum::zero(n);
    for q in 0..n {
        v.add_pauli(&PauliString::single(n, q, letter), 1.0);
    }
    v
}

/// `n⁻¹ Σ_{i<j} u_ij (X_iX_j + Z_iZ_j)` with `u_ij` uniform in `[−1, 1]`.
#[must_use]
pub fn two_body(n: usize, seed: u64) -> PauliSum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = PauliSum::zero(n);
    let scale = 1.0 / n as f64;
    for i in 0..n {
        for j in i + 1..n {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            v.add_pauli(&PauliString::x_on(n, &[i, j]), u * scale);
            v.add_pauli(&PauliString::z_on(n, &[i, j]), u * scale);
        }
    }
    v
}

/// `n⁻¹ Σ_f B_f` over all plaquettes of the L × L torus.
#[must_use]
pub fn plaquette_sum(l: usize) -> PauliSum {
    let lat = ToricLattice { l };
    let n = lat.n();
    let mut v = PauliSum::zero(n);
    for x in 0..l {
        for y in 0..l {
            v.add_pauli(&lat.face_check(x, y), 1.0 / n as f64);
        }
    }
    v
}

/// Weighted list of Pauli strings.
///
/// # Panics
///
/// Panics if a string does not act on `n` qubits.
#[must_use]
pub fn pauli_list(n: usize, terms: &[(f64, PauliString)]) -> PauliSum {
    let mut v = PauliSum::zero(n);
    for (c, p) in terms {
        v.add_pauli(p, *c);
    }
    v
}
