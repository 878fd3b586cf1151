use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nqs_uat::ansatz::Activation;
use nqs_uat::constructors::BuilderKind;

#[derive(Debug, Parser)]
#[command(name = "nqs-uat", version, about = "Construct, verify and sweep neural-network quantum states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build parameters for one target and check them by re-tabulation.
    Construct(ConstructArgs),
    /// Run a builder over seeds and a grid of θ or δ values; emits CSV.
    Sweep(SweepArgs),
    /// Compare an exp-polynomial activation with cos on exp(g z1...zK).
    DemoNecessity(DemoArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Knobs {
    #[arg(long, value_parser = parse_builder, default_value = "fnn")]
    pub builder: BuilderKind,
    /// sigmoid, tanh, cos, exp, relu or exp-poly:<degree>; defaults per builder.
    #[arg(long, value_parser = parse_activation)]
    pub activation: Option<Activation>,
    #[arg(long, default_value_t = 40.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
    #[arg(long = "omega-scale", default_value_t = 0.5)]
    pub omega_scale: f64,
    #[arg(long = "eps-zero", default_value_t = 1e-3)]
    pub eps_zero: f64,
    /// Electron count for nnbf; K/2 for random targets, inferred for files.
    #[arg(long)]
    pub electrons: Option<usize>,
    /// Max-abs error allowed; defaults per builder.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Record wall-clock times in the output.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub knobs: Knobs,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw a seeded random target instead of reading --input.
    #[arg(long, conflicts_with = "input")]
    pub random: bool,
    /// Wavefunction table JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Where to write the parameter JSON.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the report; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub knobs: Knobs,
    #[arg(long = "K")]
    pub k: usize,
    /// Seeds as a list (0,3,7) or a half-open range (0..20).
    #[arg(long, value_parser = parse_seeds, default_value = "0")]
    pub seeds: SeedList,
    /// θ values (fnn, nnbf, nps-sat) or δ values (nps-general).
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub grid: Vec<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long = "K", default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
    /// Max-abs error allowed for the cos construction.
    #[arg(long, default_value_t = 1e-2)]
    pub tolerance: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

fn parse_builder(s: &str) -> Result<BuilderKind, String> {
    s.parse().map_err(|e: nqs_uat::Error| e.to_string())
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    s.parse().map_err(|e: nqs_uat::Error| e.to_string())
}

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let bad = |_| format!("bad seed list {s:?}");
    let seeds: Vec<u64> = match s.split_once("..") {
        Some((lo, hi)) => (lo.trim().parse().map_err(bad)?..hi.trim().parse().map_err(bad)?).collect(),
        None => s.split(',').map(|t| t.trim().parse().map_err(bad)).collect::<Result<_, _>>()?,
    };
    if seeds.is_empty() {
        return Err(format!("seed list {s:?} is empty"));
    }
    Ok(SeedList(seeds))
}
