//! `klab`: command-line front end.
//!
//! Every command writes a versioned JSON report (plus CSV tables for
//! refinement studies) into `--out`. Exit status: 0 on success, 2 for
//! invalid input, 3 for numerical failures.

mod commands;
mod render;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use klab_core::{Error, Result};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "klab",
    version,
    about = "Weighted Sobolev spaces and the Dirichlet problem on polyhedral domains"
)]
pub struct Cli {
    /// Output directory for reports and tables.
    #[arg(long, global = true, default_value = "klab-out")]
    pub out: PathBuf,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Domain files.
    #[command(subcommand)]
    Domain(DomainCmd),
    /// Mesh generation and refinement.
    #[command(subcommand)]
    Mesh(MeshCmd),
    /// Distance weight and its smooth equivalent.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Weighted norm `K^mu_a` of a closed-form field.
    Norm(NormArgs),
    /// Hardy-Poincare certificate: constructive and variational constants.
    Poincare(PoincareArgs),
    /// Solves the Dirichlet problem of a problem file, with a convergence
    /// table when the exact solution is given.
    Solve(StudyArgs),
    /// Second-order stability ratio over a refinement sequence.
    RegularityStudy(StudyArgs),
    /// Sweeps the weight index of the conjugated problem.
    WindowProbe(WindowArgs),
}

#[derive(Debug, Subcommand)]
pub enum DomainCmd {
    /// Checks a domain file and reports its geometry.
    Validate(DomainArg),
}

#[derive(Debug, Subcommand)]
pub enum MeshCmd {
    /// Triangulates a domain, optionally refined and graded.
    Build(MeshArgs),
    /// Refines an existing mesh file.
    Refine(RefineArgs),
}

#[derive(Debug, Subcommand)]
pub enum WeightsCmd {
    /// Writes eta and r_omega at the mesh nodes as CSV.
    Dump(MeshArgs),
    /// Samples the equivalence constants of r_omega / eta.
    Certify(CertifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DomainArg {
    /// Domain file (JSON).
    #[arg(long)]
    pub domain: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeshArgs {
    #[command(flatten)]
    pub domain: DomainArg,
    /// Target element size of the base triangulation.
    #[arg(long, required_unless_present = "mesh")]
    pub h: Option<f64>,
    /// Existing mesh file (`.kmesh` or Gmsh 2.2) instead of `--h`.
    #[arg(long, conflicts_with = "h")]
    pub mesh: Option<PathBuf>,
    /// Radial grading exponent in (0, 1]; 1 is uniform.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Refinement levels applied to the base mesh.
    #[arg(long, default_value_t = 0)]
    pub levels: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RefineArgs {
    #[command(flatten)]
    pub domain: DomainArg,
    /// Mesh file to refine.
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Number of quasi-random interior samples.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Eta,
    ROmega,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NormArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Closed-form field, interpolated at the nodes.
    #[arg(long)]
    pub field: String,
    /// Vertex about which `r` and `theta` are measured.
    #[arg(long, default_value_t = 0)]
    pub anchor: usize,
    #[arg(long, default_value_t = 1)]
    pub mu: i32,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, value_enum, default_value_t = WeightKind::Eta)]
    pub weight: WeightKind,
    /// Also report the minimal-extension norm of the field's trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Random zero-trace fields to test against the variational constant.
    #[arg(long, default_value_t = 0)]
    pub fields: usize,
    /// Relative slack allowed in the random-field check.
    #[arg(long, default_value_t = 1e-8)]
    pub slack: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StudyArgs {
    /// Problem file (JSON).
    #[arg(long)]
    pub problem: PathBuf,
    /// Number of meshes, each one uniform refinement finer (overrides the file).
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WindowArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Weight indices to probe.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "0,0.3,0.5,0.6,0.66,0.7,0.8"
    )]
    pub grid: Vec<f64>,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("KLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "KLAB_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot configure {n} worker threads: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
