mod commands;
mod output;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "jja", version, about = "Protected Josephson-junction-array qubit toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Output file for single-artifact commands, output directory otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Energy unit label; `ej` reports rhombus energies divided by E_J.
    #[arg(long, global = true, value_enum, default_value_t = Units::Ej)]
    pub units: Units,
    /// Seed for iterative solver start vectors.
    #[arg(long, global = true, default_value_t = 24301)]
    pub seed: u64,
    /// Print the full JSON envelope to stdout.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Ej,
    Absolute,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or validate punctured lattices.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Stabilizer analysis of a lattice.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Single-rhombus potential and vortex energy.
    #[command(subcommand)]
    Rhombus(RhombusCmd),
    /// Spin Hamiltonian construction.
    #[command(subcommand)]
    Ham(HamCmd),
    /// Exact diagonalization and splitting measurements.
    #[command(subcommand)]
    Spectra(SpectraCmd),
    /// Logical gate schedules.
    #[command(subcommand)]
    Gates(GatesCmd),
    /// Canned end-to-end runs.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Debug, Subcommand)]
pub enum LatticeCmd {
    Build(LatticeBuild),
    Validate(FileArg),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LatticeBuild {
    /// Patch radius (ignored with --preset).
    #[arg(long, required_unless_present = "preset")]
    pub radius: Option<u32>,
    /// Holes as `q,r[,radius]` separated by `;`.
    #[arg(long, default_value = "")]
    pub holes: String,
    /// Named desk lattice: patch, star, extended-star, annulus, double-star.
    #[arg(long, conflicts_with = "radius")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FileArg {
    pub file: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum CodeCmd {
    Analyze(CodeAnalyze),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CodeAnalyze {
    pub file: PathBuf,
    /// Largest operator weight searched for the protection order.
    #[arg(long, default_value_t = 4)]
    pub max_weight: usize,
}

#[derive(Debug, Subcommand)]
pub enum RhombusCmd {
    Spectrum(RhombusSpectrumArgs),
    Vortex(RhombusVortexArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RhombusSpectrumArgs {
    #[arg(long, default_value_t = 1.0)]
    pub ej: f64,
    #[arg(long, default_value_t = 0.02)]
    pub ec: f64,
    /// Flux detuning in units of Φ₀.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub dflux: f64,
    #[arg(long, default_value_t = 1.0)]
    pub phi0: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RhombusVortexArgs {
    #[arg(long, default_value_t = 1.0)]
    pub ej: f64,
    /// Site spacing (vortex core size).
    #[arg(long, default_value_t = 0.01)]
    pub xi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub phi0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu0: f64,
}

#[derive(Debug, Subcommand)]
pub enum HamCmd {
    Build(HamBuild),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HamBuild {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 4.0)]
    pub eg: f64,
    /// Charge string: `auto[:hole]`, `len:N[:hole]` or edge ids `3,7,9`.
    #[arg(long, requires = "de")]
    pub charge_path: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub de: Option<f64>,
    /// Vortex loop: `auto[:hole]`, `len:N[:hole]` or edge ids.
    #[arg(long, requires = "tt")]
    pub vortex_loop: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub tt: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SpectraCmd {
    Run(SpectraRun),
    Splitting(SpectraSplitting),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectraRun {
    /// Hamiltonian JSON from `ham build`.
    pub file: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    /// Solver: auto, dense or iterative.
    #[arg(long, default_value = "auto")]
    pub method: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectraSplitting {
    /// Lattice JSON.
    pub file: PathBuf,
    /// charge or vortex.
    #[arg(long, default_value = "charge")]
    pub kind: String,
    /// Charge tuning amplitude ΔE.
    #[arg(long, default_value_t = 0.02, allow_negative_numbers = true)]
    pub de: f64,
    /// Vortex hopping amplitude t̃.
    #[arg(long, default_value_t = 0.02, allow_negative_numbers = true)]
    pub tt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 4.0)]
    pub eg: f64,
    /// Path for a single measurement (see `ham build`).
    #[arg(long, default_value = "auto")]
    pub path: String,
    /// Path lengths, e.g. `N=1..3` or `2,4`; measures the first path of each length.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub hole: usize,
}

#[derive(Debug, Subcommand)]
pub enum GatesCmd {
    Cnot(GatesCnot),
    Rotate(GatesRotate),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GatesCnot {
    #[arg(long, allow_negative_numbers = true)]
    pub g1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub g2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub g3: f64,
    /// Report the printed schedule t₁ = π/(4γ₃), t₂ = 3π/(4γ₁) − t₁, t₃ = π/(2γ₂) − t₁ as the main result.
    #[arg(long)]
    pub paper_times: bool,
    /// Round durations to this grid and report the fidelity loss.
    #[arg(long)]
    pub grid: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GatesRotate {
    #[arg(long, default_value_t = 0)]
    pub hole: usize,
    /// Number of logical qubits (defaults to hole + 1).
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Charge-tunneling coefficient δε of the X̄ pulse.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub d_eps: f64,
    /// Vortex-tunneling coefficient δE of the Z̄ pulses.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub d_e: f64,
    #[arg(long)]
    pub grid: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum PipelineCmd {
    /// One-hole patch: degeneracy check and a charge splitting sweep.
    DemoK1(DemoK1),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DemoK1 {
    #[arg(long, default_value_t = 2)]
    pub radius: u32,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 4.0)]
    pub eg: f64,
    #[arg(long, default_value_t = 0.02)]
    pub de: f64,
    #[arg(long, default_value = "N=1..3")]
    pub sweep: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
