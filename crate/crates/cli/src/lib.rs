//! Command-line front end: runs simulations, sweeps, EP loci and eigenvalue
//! surfaces from a TOML config or a figure preset, writing CSV plus a JSON manifest.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

pub mod commands;
pub mod presets;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{run, CliError, Outcome};

#[derive(Debug, Parser)]
#[command(name = "qzeno", version, about = "Exceptional points and Zeno onsets of a damped qubit pair")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitude trace c1(t), P1(t) and Γ_eff(t).
    Simulate(SimulateArgs),
    /// Γ_eff(τ) against the bath coupling, with a peak report.
    Sweep(SweepArgs),
    /// Location of the exceptional point against a bath or qubit parameter.
    EpLocus(LocusArgs),
    /// Markovian eigenvalues λ3, λ4 over a (γ̃, ε) grid.
    Eigen(EigenArgs),
    /// Cross-check every applicable engine against the others.
    OracleCheck(OracleArgs),
    /// List the figure presets.
    Figures,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// TOML run configuration.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Named figure preset, e.g. 4a.
    #[arg(long, conflicts_with = "config")]
    pub figure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Talbot,
    Fourier,
    Volterra,
    Bath,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    /// γ̃ of a Markovian bath.
    Gtilde,
    /// g of a Lorentzian or Ohmic bath.
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OverArg {
    Gamma,
    Epsilon,
    Deltac,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    /// End time in units of 1/J.
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum)]
    pub param: Option<ParamArg>,
    /// Coupling range LO:HI.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LocusArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum)]
    pub over: Option<OverArg>,
    /// Parameter values LO:HI[:N]; N defaults to 11.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub source: Source,
    /// GT0:GT1:N,EPS0:EPS1:M
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}
