//! Low-lying spectra of `H₀ + εV`, ground-cluster identification,
//! projector comparison with the SWT frame, and relative boundedness.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::code::StabilizerCode;
use crate::eigs::{lowest_eigenpairs, EigError, KrylovSettings};
use crate::operator::{hermitian_eigenvalues, op_norm, symmetric_eigenvalues, HermitianEigen, PauliSum, RealPauliOperator};
use crate::swt::{CodeContext, SwtError, SwtRun};

/// Largest system diagonalized densely.
pub const DENSE_LIMIT: usize = 12;
/// Largest system handled by the sparse solver.
pub const SPARSE_LIMIT: usize = 20;
/// Minimum ratio between the cluster gap and the largest gap inside it.
pub const CLUSTER_SEPARATION: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("{n} qubits exceed the {mode} limit of {limit}")]
    TooLarge { n: usize, mode: &'static str, limit: usize },
    #[error("sparse mode needs a real Hamiltonian")]
    NotReal,
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Swt(#[from] SwtError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Dense,
    Sparse,
}

impl SpectrumMode {
    /// Dense up to 10 qubits, sparse above.
    #[must_use]
    pub fn auto(n: usize) -> Self {
        if n <= 10 {
            Self::Dense
        } else {
            Self::Sparse
        }
    }
}

/// Weyl comparison `|λ_m(H₀+εV) − λ_m(H₀)| <= ε‖V‖`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylCheck {
    pub max_shift: f64,
    /// Exact norm in dense mode, `Σ|c|` in sparse mode.
    pub perturbation_norm: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub mode: SpectrumMode,
    pub eigenvalues: Vec<f64>,
    pub cluster_size: usize,
    pub splitting: f64,
    /// `λ_{2^k − 1} − λ_0`, the spread of the lowest `2^k` levels whether
    /// or not they form a resolved cluster.
    pub lowest_spread: f64,
    pub gap: f64,
    /// Cluster gap over the largest gap inside the cluster.
    pub separation: f64,
    pub resolved: bool,
    pub residuals: Option<Vec<f64>>,
    pub weyl: WeylCheck,
}

/// Ground cluster among the lowest `2^k + 1` levels: the largest gap.
/// Returns `(size, splitting, gap, separation)`.
#[must_use]
pub fn ground_cluster(eigenvalues: &[f64], k: usize) -> (usize, f64, f64, f64) {
    let window = ((1usize << k) + 1).min(eigenvalues.len());
    if window < 2 {
        return (eigenvalues.len(), 0.0, f64::INFINITY, f64::INFINITY);
    }
    let gaps: Vec<f64> = eigenvalues[..window].windows(2).map(|w| w[1] - w[0]).collect();
    let mut best = 0;
    for (j, g) in gaps.iter().enumerate() {
        if *g > gaps[best] {
            best = j;
        }
    }
    let size = best + 1;
    let inner = gaps[..best].iter().copied().fold(0.0, f64::max);
    let gap = gaps[best];
    let separation = if inner > 0.0 { gap / inner } else { f64::INFINITY };
    (size, eigenvalues[best] - eigenvalues[0], gap, separation)
}

/// `H₀ + εV` as a Pauli sum.
#[must_use]
pub fn perturbed_hamiltonian(code: &StabilizerCode, v: &PauliSum, epsilon: f64) -> PauliSum {
    let ctx = CodeContext::new(code).expect("code within 64 qubits");
    ctx.hamiltonian().plus(&v.scaled_re(epsilon))
}

struct Levels {
    values: Vec<f64>,
    residuals: Option<Vec<f64>>,
}

fn lowest_levels(h: &PauliSum, num: usize, mode: SpectrumMode, seed: u64) -> Result<Levels, SpectrumError> {
    let n = h.n();
    match mode {
        SpectrumMode::Dense => {
            if n > DENSE_LIMIT {
                return Err(SpectrumError::TooLarge {
                    n,
                    mode: "dense",
                    limit: DENSE_LIMIT,
                });
            }
            let values = match h.to_dense_real() {
                Some(m) => symmetric_eigenvalues(&m),
                None => hermitian_eigenvalues(&h.to_dense()),
            };
            Ok(Levels {
                values: values.into_iter().take(num).collect(),
                residuals: None,
            })
        }
        SpectrumMode::Sparse => {
            if n > SPARSE_LIMIT {
                return Err(SpectrumError::TooLarge {
                    n,
                    mode: "sparse",
                    limit: SPARSE_LIMIT,
                });
            }
            let op = RealPauliOperator::new(h).ok_or(SpectrumError::NotReal)?;
            let num = num.min(op.dim());
            let pairs = lowest_eigenpairs(&op, num, KrylovSettings::for_wanted(num, seed))?;
            Ok(Levels {
                values: pairs.values,
                residuals: Some(pairs.residuals),
            })
        }
    }
}

/// Lowest `num_eigs` levels of `H₀ + εV` with the ground cluster and the
/// Weyl comparison against `H₀`.
///
/// # Errors
///
/// Fails above the size limit of the chosen mode, for complex
/// Hamiltonians in sparse mode, or on eigensolver non-convergence.
pub fn spectral_report(
    code: &StabilizerCode,
    v: &PauliSum,
    epsilon: f64,
    num_eigs: usize,
    mode: SpectrumMode,
    seed: u64,
) -> Result<SpectralReport, SpectrumError> {
    let k = code.k();
    let num = num_eigs.max((1usize << k) + 4);
    let ctx = CodeContext::new(code)?;
    let h0 = ctx.hamiltonian();
    let h = h0.plus(&v.scaled_re(epsilon));
    let levels = lowest_levels(&h, num, mode, seed)?;
    let base = if epsilon == 0.0 {
        levels.values.clone()
    } else {
        lowest_levels(&h0, num, mode, seed)?.values
    };
    let perturbation_norm = match mode {
        SpectrumMode::Dense => op_norm(&v.to_dense()) * epsilon.abs(),
        SpectrumMode::Sparse => v.l1_norm() * epsilon.abs(),
    };
    let max_shift = levels
        .values
        .iter()
        .zip(&base)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let (cluster_size, splitting, gap, separation) = ground_cluster(&levels.values, k);
    let top = ((1usize << k) - 1).min(levels.values.len() - 1);
    let lowest_spread = levels.values[top] - levels.values[0];
    Ok(SpectralReport {
        n: code.n(),
        k,
        epsilon,
        mode,
        eigenvalues: levels.values,
        cluster_size,
        splitting,
        lowest_spread,
        gap,
        separation,
        resolved: separation >= CLUSTER_SEPARATION,
        residuals: levels.residuals,
        weyl: WeylCheck {
            max_shift,
            perturbation_norm,
            holds: max_shift <= perturbation_norm + 1e-9,
        },
    })
}

/// Dense projector onto the lowest `count` eigenvectors of `h`; the cut is
/// placed midway between levels `count − 1` and `count`.
#[must_use]
pub fn low_energy_projector(h: &DMatrix<Complex64>, count: usize) -> DMatrix<Complex64> {
    let eig = HermitianEigen::new(h);
    let vals = eig.eigenvalues();
    let cut = if count >= vals.len() {
        f64::INFINITY
    } else {
        0.5 * (vals[count - 1] + vals[count])
    };
    eig.apply(|l| if l <= cut { 1.0 } else { 0.0 })
}

/// `‖P_new − U_m P U_m†‖` for every stored unitary of the run, where
/// `P_new` projects onto the lowest `2^k` states of `H₀ + V`.
///
/// # Errors
///
/// Fails for codes beyond the dense limit.
pub fn projector_distances(code: &StabilizerCode, v: &PauliSum, run: &SwtRun) -> Result<Vec<f64>, SpectrumError> {
    if code.n() > DENSE_LIMIT {
        return Err(SpectrumError::TooLarge {
            n: code.n(),
            mode: "dense",
            limit: DENSE_LIMIT,
        });
    }
    let ctx = CodeContext::new(code)?;
    let h = ctx.hamiltonian().plus(v).to_dense();
    let p_new = low_energy_projector(&h, 1usize << code.k());
    let p = ctx.local_projector(u64::MAX >> (64 - code.n())).to_dense();
    Ok(run
        .unitaries
        .iter()
        .map(|u| op_norm(&(&p_new - u * &p * u.adjoint())))
        .collect())
}

/// Relative bound of `D` against `H₀`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeBound {
    /// Smallest `c` with `‖(D − c_D)ψ‖ <= c ‖H₀ψ‖` on the complement of
    /// `ker H₀`.
    pub c: f64,
    /// `c_D = tr(P D)/tr(P)`.
    pub offset: f64,
    /// `‖P D (I − P)‖`; nonzero means `D` is not block diagonal.
    pub off_block: f64,
    /// `‖(D − c_D) P‖`; zero when `D` is constant on the code space.
    pub kernel_leakage: f64,
    pub block_diagonal: bool,
}

/// `c = ‖(D − c_D) H₀⁺‖` with `H₀⁺` the pseudo-inverse.
///
/// # Errors
///
/// Fails for codes beyond the dense limit.
pub fn relative_bound_estimate(code: &StabilizerCode, d: &DMatrix<Complex64>) -> Result<RelativeBound, SpectrumError> {
    if code.n() > DENSE_LIMIT {
        return Err(SpectrumError::TooLarge {
            n: code.n(),
            mode: "dense",
            limit: DENSE_LIMIT,
        });
    }
    let ctx = CodeContext::new(code)?;
    let dim = 1usize << code.n();
    let h0 = ctx.hamiltonian().to_dense();
    let p = ctx.local_projector(u64::MAX >> (64 - code.n())).to_dense();
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let q = &id - &p;
    let trace_p = p.trace().re;
    let offset = (&p * d).trace().re / trace_p;
    let x = d - id.scale(offset);
    let pinv = HermitianEigen::new(&h0).apply(|l| if l.abs() > 1e-9 { 1.0 / l } else { 0.0 });
    let off_block = op_norm(&(&p * d * &q));
    Ok(RelativeBound {
        c: op_norm(&(&x * pinv)),
        offset,
        off_block,
        kernel_leakage: op_norm(&(&x * &p)),
        block_diagonal: off_block <= 1e-9,
    })
}
