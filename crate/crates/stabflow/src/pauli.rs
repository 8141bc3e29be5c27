//! Hermitian Pauli strings in symplectic form.
//!
//! A string is `sign · ⊗ σ_i` with `σ_i ∈ {I, X, Y, Z}`; a qubit carrying
//! both an X bit and a Z bit holds `Y = iXZ`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gf2::BitVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid Pauli letter {0:?}")]
    BadLetter(char),
    #[error("product of anticommuting strings is not Hermitian")]
    NotHermitian,
}

/// Unit phase `i^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(pub u8);

impl Phase {
    pub const ONE: Self = Self(0);
    pub const I: Self = Self(1);
    pub const MINUS_ONE: Self = Self(2);
    pub const MINUS_I: Self = Self(3);

    #[must_use]
    pub fn mul(self, other: Self) -> Self {
        Self((self.0 + other.0) % 4)
    }

    #[must_use]
    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// `(re, im)` of `i^k`.
    #[must_use]
    pub fn as_pair(self) -> (f64, f64) {
        match self.0 % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

/// A Hermitian Pauli string with a real sign.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: BitVector,
    z: BitVector,
    negative: bool,
}

impl PauliString {
    #[must_use]
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
            negative: false,
        }
    }

    /// # Panics
    ///
    /// Panics if the bit vectors have different lengths.
    #[must_use]
    pub fn from_bits(x: BitVector, z: BitVector, negative: bool) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts must have equal length");
        Self {
            n: x.len(),
            x,
            z,
            negative,
        }
    }

    /// Product of `X` on the listed qubits.
    #[must_use]
    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        Self::from_bits(BitVector::from_indices(n, qubits), BitVector::zeros(n), false)
    }

    /// Product of `Z` on the listed qubits.
    #[must_use]
    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        Self::from_bits(BitVector::zeros(n), BitVector::from_indices(n, qubits), false)
    }

    /// Single-qubit letter at `qubit`.
    #[must_use]
    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set_letter(qubit, letter);
        p
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn x_bits(&self) -> &BitVector {
        &self.x
    }

    #[must_use]
    pub fn z_bits(&self) -> &BitVector {
        &self.z
    }

    #[must_use]
    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// `+1` or `-1`.
    #[must_use]
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    #[must_use]
    pub fn with_sign(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }

    #[must_use]
    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    #[must_use]
    pub fn letter(&self, q: usize) -> Letter {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn set_letter(&mut self, q: usize, letter: Letter) {
        let (x, z) = match letter {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        };
        self.x.set(q, x);
        self.z.set(q, z);
    }

    #[must_use]
    pub fn support_bits(&self) -> BitVector {
        self.x.or(&self.z)
    }

    #[must_use]
    pub fn support(&self) -> Vec<usize> {
        self.support_bits().iter_ones().collect()
    }

    #[must_use]
    pub fn weight(&self) -> usize {
        self.support_bits().weight()
    }

    /// Identity up to sign.
    #[must_use]
    pub fn is_identity_up_to_sign(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    #[must_use]
    pub fn is_x_type(&self) -> bool {
        self.z.is_zero()
    }

    #[must_use]
    pub fn is_z_type(&self) -> bool {
        self.x.is_zero()
    }

    /// Number of Y letters; odd counts give imaginary matrix entries.
    #[must_use]
    pub fn y_count(&self) -> usize {
        self.x.and(&self.z).weight()
    }

    /// Symplectic form: `true` iff the strings anticommute.
    ///
    /// # Errors
    ///
    /// Returns [`PauliError::LengthMismatch`] for different qubit counts.
    pub fn anticommutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_len(other)?;
        Ok(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// # Errors
    ///
    /// Returns [`PauliError::LengthMismatch`] for different qubit counts.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.anticommutes(other).map(|a| !a)
    }

    /// Full product `self · other = phase · P` with `P` carrying sign `+1`.
    ///
    /// # Errors
    ///
    /// Returns [`PauliError::LengthMismatch`] for different qubit counts.
    pub fn mul_phase(&self, other: &Self) -> Result<(Phase, Self), PauliError> {
        self.check_len(other)?;
        // Letter form is i^{|x∧z|} X^x Z^z and X^x1 Z^z1 X^x2 Z^z2 = (-1)^{z1·x2} X^{x1+x2} Z^{z1+z2}.
        let x = self.x.xor(&other.x);
        let z = self.z.xor(&other.z);
        let a1 = self.x.and(&self.z).weight();
        let a2 = other.x.and(&other.z).weight();
        let a3 = x.and(&z).weight();
        let b = self.z.and(&other.x).weight();
        let mut k = (a1 + a2 + 2 * b + 4 * self.n - a3) % 4;
        if self.negative {
            k += 2;
        }
        if other.negative {
            k += 2;
        }
        Ok((
            Phase((k % 4) as u8),
            Self {
                n: self.n,
                x,
                z,
                negative: false,
            },
        ))
    }

    /// Product of two commuting strings.
    ///
    /// # Errors
    ///
    /// Returns [`PauliError::NotHermitian`] if the strings anticommute, and
    /// [`PauliError::LengthMismatch`] for different qubit counts.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        let (phase, p) = self.mul_phase(other)?;
        if !phase.is_real() {
            return Err(PauliError::NotHermitian);
        }
        Ok(p.with_sign(phase == Phase::MINUS_ONE))
    }

    /// Restriction of the letters to `qubits`, in the given order.
    #[must_use]
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut p = Self::identity(qubits.len());
        for (k, &q) in qubits.iter().enumerate() {
            p.set_letter(k, self.letter(q));
        }
        p.negative = self.negative;
        p
    }

    /// Action on a computational basis state: `P|b⟩ = phase · |b ⊕ x⟩`,
    /// with qubit `i` stored in bit `i` of `b`.
    ///
    /// # Panics
    ///
    /// Panics if `n > 64`.
    #[must_use]
    pub fn masks(&self) -> (u64, u64) {
        assert!(self.n <= 64, "basis-state action needs n <= 64");
        let w = |v: &BitVector| v.words().first().copied().unwrap_or(0);
        (w(&self.x), w(&self.z))
    }

    fn check_len(&self, other: &Self) -> Result<(), PauliError> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(PauliError::LengthMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for q in 0..self.n {
            let c = match self.letter(q) {
                Letter::I => 'I',
                Letter::X => 'X',
                Letter::Y => 'Y',
                Letter::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Parse strings such as `"+XIZY"`, `"-ZZ"` or `"XX"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let mut p = Self::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let l = match c {
                'I' | '_' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                other => return Err(PauliError::BadLetter(other)),
            };
            p.set_letter(q, l);
        }
        Ok(p.with_sign(negative))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        let (ph, r) = p("X").mul_phase(&p("Z")).unwrap();
        assert_eq!((ph, r), (Phase::MINUS_I, p("Y")));
        let (ph, r) = p("Z").mul_phase(&p("X")).unwrap();
        assert_eq!((ph, r), (Phase::I, p("Y")));
        let (ph, r) = p("Y").mul_phase(&p("Z")).unwrap();
        assert_eq!((ph, r), (Phase::I, p("X")));
        let (ph, r) = p("Y").mul_phase(&p("Y")).unwrap();
        assert_eq!((ph, r), (Phase::ONE, p("I")));
    }

    #[test]
    fn anticommuting_product_is_rejected() {
        assert_eq!(p("XI").multiply(&p("ZI")), Err(PauliError::NotHermitian));
        assert_eq!(p("XX").multiply(&p("ZZ")).unwrap(), p("-YY"));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["+XIZY", "-ZZ", "+I"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!(matches!("XQ".parse::<PauliString>(), Err(PauliError::BadLetter('Q'))));
    }
}
