//! Serializable descriptions of codes and perturbations. Reports embed
//! them so every output can be regenerated from its own header.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stabflow::alist::load_alist;
use stabflow::code::StabilizerCode;
use stabflow::constructors::{
    field_code, hypergraph_product, ising_code, ising_toric, random_biregular_classical, repetition_code, toric_code, ClassicalCode,
    Graph,
};
use stabflow::operator::PauliSum;
use stabflow::pauli::{Letter, PauliString};
use stabflow::perturbations::{pauli_list, plaquette_sum, two_body, uniform_field};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CodeSpec {
    Repetition { n: usize },
    Cycle { n: usize },
    Field { n: usize },
    Toric { l: usize },
    IsingToric { l: usize },
    Hgp { left: ClassicalSpec, right: ClassicalSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalSpec {
    RepetitionPath { n: usize },
    RepetitionCyclic { n: usize },
    Biregular { n: usize, bit_degree: usize, check_degree: usize, seed: u64 },
    Alist { path: PathBuf },
}

impl ClassicalSpec {
    /// # Errors
    ///
    /// Fails on unreadable or malformed alist files and bad parameters.
    pub fn build(&self) -> Result<ClassicalCode, CliError> {
        Ok(match self {
            Self::RepetitionPath { n } => ClassicalCode::repetition_path(*n),
            Self::RepetitionCyclic { n } => ClassicalCode::repetition_cyclic(*n),
            Self::Biregular {
                n,
                bit_degree,
                check_degree,
                seed,
            } => random_biregular_classical(*n, *bit_degree, *check_degree, *seed)?,
            Self::Alist { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                load_alist(&text)?
            }
        })
    }
}

impl CodeSpec {
    /// # Errors
    ///
    /// Invalid parameters are usage errors.
    pub fn build(&self) -> Result<StabilizerCode, CliError> {
        Ok(match self {
            Self::Repetition { n } => repetition_code(*n)?,
            Self::Cycle { n } => {
                if *n < 3 {
                    return Err(CliError::Usage(format!("a cycle needs at least 3 qubits, got {n}")));
                }
                ising_code(&Graph::cycle(*n))?
            }
            Self::Field { n } => field_code(*n)?,
            Self::Toric { l } => toric_code(*l)?,
            Self::IsingToric { l } => ising_toric(*l)?,
            Self::Hgp { left, right } => hypergraph_product(&left.build()?, &right.build()?)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PerturbationSpec {
    XField,
    ZField,
    /// Random couplings on the complete graph, seeded.
    TwoBody { seed: u64 },
    /// `n⁻¹ Σ B_f` on an L × L torus.
    Plaquettes { l: usize },
    Paulis { terms: Vec<(f64, String)> },
}

impl PerturbationSpec {
    /// Unit-strength operator on `n` qubits.
    ///
    /// # Errors
    ///
    /// Fails on malformed Pauli strings or mismatched lengths.
    pub fn build(&self, n: usize) -> Result<PauliSum, CliError> {
        Ok(match self {
            Self::XField => uniform_field(n, Letter::X),
            Self::ZField => uniform_field(n, Letter::Z),
            Self::TwoBody { seed } => two_body(n, *seed),
            Self::Plaquettes { l } => {
                if 2 * l * l != n {
                    return Err(CliError::Usage(format!("plaquette sum for L = {l} needs {} qubits, code has {n}", 2 * l * l)));
                }
                plaquette_sum(*l)
            }
            Self::Paulis { terms } => {
                let mut parsed = Vec::with_capacity(terms.len());
                for (c, s) in terms {
                    let p: PauliString = s.parse().map_err(|e| CliError::Usage(format!("{s}: {e}")))?;
                    if p.n() != n {
                        return Err(CliError::Usage(format!("{s} acts on {} qubits, code has {n}", p.n())));
                    }
                    parsed.push((*c, p));
                }
                pauli_list(n, &parsed)
            }
        })
    }
}

/// Parses `coeff:PAULI`, e.g. `0.5:XXI`; a bare string has coefficient 1.
///
/// # Errors
///
/// Fails on a non-numeric coefficient.
pub fn parse_weighted_pauli(s: &str) -> Result<(f64, String), String> {
    match s.split_once(':') {
        Some((c, p)) => Ok((c.trim().parse().map_err(|e| format!("{c}: {e}"))?, p.trim().to_string())),
        None => Ok((1.0, s.trim().to_string())),
    }
}
