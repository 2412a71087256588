use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "typical", version, about = "Certified avoidance constructions on the unit cube")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a one-point-per-cube configuration with a margin certificate.
    Generate(GenerateArgs),
    /// Re-check a certificate, or scan a plain point set for a violation.
    Verify(VerifyArgs),
    /// Hausdorff distance between two point sets.
    Hausdorff(HausdorffArgs),
    /// Move a finite set off a nowhere-dense set.
    HitTest(HitTestArgs),
    /// Box-counting profile as CSV.
    Dimension(DimensionArgs),
    /// Finite set arithmetic.
    #[command(subcommand)]
    Arith(ArithCommand),
    /// Piecewise-linear functions and fibres.
    #[command(subcommand)]
    Func(FuncCommand),
    /// Finite-stage approximants of a typical compact set.
    SampleTypical(SampleTypicalArgs),
    /// Re-run a recorded manifest and compare output digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintKind {
    Pattern,
    GeneralPosition,
    Angle,
}

#[derive(Debug, Args)]
pub struct ConstraintArgs {
    #[arg(long, value_enum)]
    pub constraint: Option<ConstraintKind>,
    /// `equilateral`, `line:a,b,c` (collinear points), or a JSON file holding
    /// a three-point set or `{"squared_sides": [..]}`.
    #[arg(long, alias = "pattern-file", default_value = "equilateral")]
    pub pattern: String,
    /// Forbidden angle in radians.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub level: u32,
    #[arg(long)]
    pub dim: usize,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub max_retries: u32,
    /// Acceptance threshold on new tuple gaps.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Perturbation trials run against the margin after generation.
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "in_file"])))]
pub struct VerifyArgs {
    /// Certificate or point-set JSON.
    pub input: Option<PathBuf>,
    /// Same as the positional input.
    #[arg(long = "in", value_name = "FILE")]
    pub in_file: Option<PathBuf>,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Perturbation trials against a certificate's margin.
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct HausdorffArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub float: bool,
}

#[derive(Debug, Args)]
pub struct HitTestArgs {
    #[arg(long)]
    pub set: PathBuf,
    /// Scheme JSON for `A`.
    #[arg(long)]
    pub avoid: PathBuf,
    #[arg(long)]
    pub level: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long)]
    pub max_level: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SetM {
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bound on intermediate elements.
    #[arg(long)]
    pub cap: Option<u128>,
}

#[derive(Debug, Subcommand)]
pub enum ArithCommand {
    /// m-fold sumset.
    Sum(SetM),
    /// m-fold product set.
    Prod(SetM),
    /// Polynomial image from coefficients `a0,a1,...`.
    Poly(PolyArgs),
    /// Partial sum S_m of e^A with its Cauchy gap bound.
    Exp(SetM),
    /// Check S^m(A) against the scaled diagonal projection of A^m.
    Identity(SetM),
    /// Covering bound (2^n+1)^m (2^{-n^2} sqrt m)^s.
    Cover(CoverArgs),
    /// Box counts of S^m and T^m of padded dyadic skeletons, as CSV.
    DimEvidence(DimEvidenceArgs),
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub cap: Option<u128>,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub s: f64,
}

#[derive(Debug, Args)]
pub struct DimEvidenceArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub levels: Vec<u32>,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum FuncCommand {
    /// Whether the graph of f meets the fibre set.
    HitTest(FuncHitArgs),
    /// Shift f off one or more fibre sets.
    Avoid(FuncAvoidArgs),
}

#[derive(Debug, Args)]
pub struct FuncHitArgs {
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long)]
    pub fiber: PathBuf,
}

#[derive(Debug, Args)]
pub struct FuncAvoidArgs {
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, required = true)]
    pub fiber: Vec<PathBuf>,
    #[arg(long)]
    pub eps: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleTypicalArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}
