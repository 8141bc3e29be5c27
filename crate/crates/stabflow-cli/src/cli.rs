use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stabflow", version, about = "Stability experiments for LDPC code Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, global = true, env = "STABFLOW_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a code and write it as JSON.
    Build(BuildArgs),
    /// Print n, k and d.
    Params(ParamsArgs),
    /// Soundness and expansion profiles.
    Soundness(SoundnessArgs),
    /// Flow trajectory and stability certificate.
    Flow(FlowArgs),
    /// Exact Schrieffer-Wolff iteration.
    Swt(SwtArgs),
    /// Low-lying spectra over an ε grid.
    Spectrum(SpectrumArgs),
    /// Run the acceptance criteria.
    Suite(SuiteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Rep,
    Cycle,
    Field,
    Toric,
    IsingToric,
    Hgp,
}

#[derive(Debug, Args, Clone, Default)]
pub struct FamilyArgs {
    /// Qubit count for rep, cycle and field.
    #[arg(long)]
    pub n: Option<usize>,
    /// Torus size for toric and ising-toric.
    #[arg(long = "L", alias = "l")]
    pub l: Option<usize>,
    /// Left classical code (alist) for hgp.
    #[arg(long)]
    pub left: Option<PathBuf>,
    /// Right classical code (alist) for hgp.
    #[arg(long)]
    pub right: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(value_enum)]
    pub family: Family,
    #[command(flatten)]
    pub params: FamilyArgs,
    /// Largest logical weight searched when computing d.
    #[arg(long, default_value_t = 8)]
    pub w_max: usize,
}

/// A code from an artifact file or from family parameters.
#[derive(Debug, Args, Clone)]
pub struct CodeArgs {
    /// Code artifact written by `build`.
    #[arg(long, conflicts_with = "family")]
    pub code: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[command(flatten)]
    pub params: FamilyArgs,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, default_value_t = 8)]
    pub w_max: usize,
}

#[derive(Debug, Args)]
pub struct SoundnessArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Largest stabilizer weight tabulated; defaults to n.
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Group elements visited before falling back to sampling.
    #[arg(long, default_value_t = 1 << 20)]
    pub budget: usize,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Largest check subset in the expansion profile.
    #[arg(long, default_value_t = 3)]
    pub size_max: usize,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa1: f64,
    #[arg(long, default_value_t = 5)]
    pub delta: usize,
    #[arg(long, default_value_t = 0.1)]
    pub c_f_prime: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_f_dblprime: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c_tilde_f_dblprime: f64,
    /// Qubit count entering ε*.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Effective distance; overridden by `--c-d`.
    #[arg(long, default_value_t = 40)]
    pub d_s: usize,
    /// Sets d_s = ⌈c_d ln n⌉ and reports the smallest valid n.
    #[arg(long)]
    pub c_d: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Trajectory length.
    #[arg(long, default_value_t = 200)]
    pub orders: usize,
    /// Orders scanned when searching for ε₀.
    #[arg(long, default_value_t = 10_000)]
    pub m_check: usize,
    /// Also write the trajectory as CSV here.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbationKind {
    XField,
    ZField,
    TwoBody,
    Plaquettes,
    Paulis,
}

#[derive(Debug, Args, Clone)]
pub struct PerturbationArgs {
    #[arg(long, value_enum, default_value_t = PerturbationKind::XField)]
    pub perturbation: PerturbationKind,
    /// Weighted strings `coeff:PAULI` for `--perturbation paulis`.
    #[arg(long = "pauli", value_parser = crate::spec::parse_weighted_pauli)]
    pub paulis: Vec<(f64, String)>,
}

#[derive(Debug, Args)]
pub struct SwtArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub perturbation: PerturbationArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 6)]
    pub orders: usize,
    /// Terms with |S| >= d_s go to the remainder; defaults to n + 1.
    #[arg(long)]
    pub d_s: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub kappa1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub perturbation: PerturbationArgs,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Levels computed; at least 2^k + 4.
    #[arg(long, default_value_t = 0)]
    pub num_eigs: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Also run this many SWT orders per point (dense codes only).
    #[arg(long)]
    pub swt_orders: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Criterion ids (`3a`, `5`) or names (`soundness`, `flow`).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
}
