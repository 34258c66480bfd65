use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "polyvar",
    version,
    about = "Moments, samplers and conjecture statistics for hyperplane projections of the cube and cross-polytope"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Sample one body and report every conjecture statistic.
    Moments(MomentsArgs),
    /// Check the exact square-negative-correlation gap on random triples.
    VerifySnc(SncArgs),
    /// One row of statistics per dimension.
    Sweep(SweepArgs),
    /// Haar rotation-average experiment for a diagonal map.
    Rotate(RotateArgs),
    /// Closed forms against the convex-hull oracle (n ≤ 4).
    OracleCompare(OracleArgs),
    /// Closed-form volume, cross-checked against the oracle when n ≤ 4.
    Volume(VolumeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BodyKind {
    /// Projection of the cube onto θ⊥.
    CubeProj,
    /// Projection of the cross-polytope onto θ⊥.
    CrossProj,
    /// Isotropic cube [−√3, √3]ⁿ.
    Cube,
    /// Centred simplex Δ_{n−1}, in the frame of θ = (1, …, 1)/√n.
    Simplex,
}

impl BodyKind {
    pub fn label(self) -> &'static str {
        match self {
            BodyKind::CubeProj => "cube-proj",
            BodyKind::CrossProj => "cross-proj",
            BodyKind::Cube => "cube",
            BodyKind::Simplex => "simplex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Random seed (64-bit).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (default: csv for sweep, json otherwise).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Sampling {
    /// Number of samples.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Batches for the standard errors.
    #[arg(long, default_value_t = 64)]
    pub batches: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long, value_enum)]
    pub body: BodyKind,
    #[arg(long)]
    pub n: usize,
    /// random | axis:i (1-based) | coords:a,b,… | file:path
    #[arg(long, default_value = "random")]
    pub theta: String,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SncArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub body: BodyKind,
    #[arg(long)]
    pub n_min: usize,
    #[arg(long)]
    pub n_max: usize,
    #[arg(long, default_value = "random")]
    pub theta: String,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RotateArgs {
    /// Base body; must be isotropic (only `cube` is).
    #[arg(long, value_enum, default_value = "cube")]
    pub body: BodyKind,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Number of Haar rotations.
    #[arg(long, default_value_t = 16)]
    pub trials: usize,
    /// Diagonal of T as comma-separated values; default diag(1, …, 1, 10).
    #[arg(long)]
    pub t_diag: Option<String>,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub body: BodyKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "random")]
    pub theta: String,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VolumeArgs {
    #[arg(long, value_enum)]
    pub body: BodyKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "random")]
    pub theta: String,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Moments(a) => &a.common,
            Command::VerifySnc(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Rotate(a) => &a.common,
            Command::OracleCompare(a) => &a.common,
            Command::Volume(a) => &a.common,
        }
    }

    pub fn format(&self) -> Format {
        let default = if matches!(self, Command::Sweep(_)) { Format::Csv } else { Format::Json };
        self.common().format.unwrap_or(default)
    }
}
