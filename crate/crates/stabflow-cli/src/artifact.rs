//! Code artifacts written by `build` and read back by the other commands.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stabflow::code::{code_parameters, validate, CodeKind, Distance, StabilizerCode};
use stabflow::pauli::PauliString;

use crate::error::CliError;
use crate::spec::CodeSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeArtifact {
    pub input: CodeSpec,
    pub n: usize,
    pub k: usize,
    pub kind: CodeKind,
    pub d: Option<Distance>,
    pub d_x: Option<Distance>,
    pub d_z: Option<Distance>,
    /// Whether `d` is exact rather than a lower bound.
    pub d_certified: bool,
    pub q: usize,
    pub q_prime: usize,
    pub delta: usize,
    pub checks: Vec<String>,
    pub lambdas: Vec<f64>,
}

impl CodeArtifact {
    /// # Errors
    ///
    /// Fails if the code does not validate.
    pub fn new(input: CodeSpec, code: &StabilizerCode, w_max: usize) -> Result<Self, CliError> {
        let metrics = validate(code)?;
        let params = code_parameters(code, w_max);
        Ok(Self {
            input,
            n: code.n(),
            k: code.k(),
            kind: code.kind(),
            d: params.d,
            d_x: params.d_x,
            d_z: params.d_z,
            d_certified: matches!(params.d, Some(Distance::Exact(_))),
            q: metrics.q,
            q_prime: metrics.q_prime,
            delta: metrics.delta,
            checks: code.checks().iter().map(ToString::to_string).collect(),
            lambdas: code.lambdas().to_vec(),
        })
    }

    /// Rebuilds the code from the stored checks and weights.
    ///
    /// # Errors
    ///
    /// Fails on malformed check strings or an invalid code.
    pub fn code(&self) -> Result<StabilizerCode, CliError> {
        let checks = self
            .checks
            .iter()
            .map(|s| s.parse::<PauliString>().map_err(|e| CliError::Usage(format!("{s}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StabilizerCode::with_lambdas(self.n, checks, self.lambdas.clone())?)
    }

    /// # Errors
    ///
    /// Fails on unreadable or malformed files.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// `[[n, k, d]]` with `≥` marking a lower bound.
    #[must_use]
    pub fn summary(&self) -> String {
        let d = match self.d {
            Some(Distance::Exact(d)) => d.to_string(),
            Some(Distance::AtLeast(d)) => format!(">={d}"),
            None => "-".into(),
        };
        format!("[[{}, {}, {}]]", self.n, self.k, d)
    }
}
