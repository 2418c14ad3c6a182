//! Command-line front end for the sampling pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dualsample",
    version,
    about = "Dual-objective stratified spatial sampling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the sampling grid as a unit CSV.
    Grid(GridArgs),
    /// Attach POI diversity (d0, d1, d2, mul) and optionally built-up share.
    Enrich(EnrichArgs),
    /// Split units into building-dense and building-sparse strata.
    Stratify(StratifyArgs),
    /// Select samples from one stratum by simulated annealing.
    Sample(SampleArgs),
    /// Compare sampling methods over many seeds.
    Compare(CompareArgs),
    /// Write a synthetic study area (units + POIs).
    Scenario(ScenarioArgs),
    /// Segmentation metrics from label grids.
    Eval(EvalArgs),
    /// Majority-vote class label per building instance.
    Resolve(ResolveArgs),
    /// Re-run the command recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    /// Planar bounding box `min_x,min_y,max_x,max_y` in meters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bbox: Option<Vec<f64>>,
    /// GeoJSON polygon; cells whose centroid falls outside are dropped.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Projection origin `lon,lat`; treats the boundary as geographic.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub origin: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000.0)]
    pub cell_side: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EnrichArgs {
    #[arg(long)]
    pub units: PathBuf,
    #[arg(long)]
    pub pois: PathBuf,
    /// Land-cover sample points (`x,y,builtup`) used to set built-up share.
    #[arg(long)]
    pub landcover: Option<PathBuf>,
    /// Projection origin `lon,lat` for geographic inputs.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub origin: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
    /// Summary CSV (`key,value`).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StratifyArgs {
    #[arg(long)]
    pub units: PathBuf,
    /// `auto` (lower quartile of built-up share) or a value in [0, 1].
    #[arg(long, default_value = "auto")]
    pub threshold: String,
    #[arg(long)]
    pub dense_out: PathBuf,
    #[arg(long)]
    pub sparse_out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum StratumArg {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Dual,
    Spatial,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnnealArgs {
    #[arg(long, default_value_t = 0.05)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.999)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub ttol: f64,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Unit CSV of one stratum (as written by `stratify`).
    #[arg(long)]
    pub units: PathBuf,
    #[arg(long, value_enum)]
    pub stratum: StratumArg,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub anneal: AnnealArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "dual")]
    pub mode: ModeArg,
    /// Selected units CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-iteration trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScenarioFlags {
    #[arg(long, default_value_t = 50)]
    pub nx: usize,
    #[arg(long, default_value_t = 50)]
    pub ny: usize,
    #[arg(long = "scenario-cell-side", default_value_t = 1000.0)]
    pub cell_side: f64,
    #[arg(long, default_value_t = 12)]
    pub clusters: usize,
    #[arg(long, default_value_t = 1500)]
    pub pois_per_cluster: usize,
    #[arg(long, default_value_t = 10)]
    pub categories: usize,
    #[arg(long, default_value_t = 8000.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 0.9)]
    pub builtup_peak: f64,
    #[arg(long, default_value_t = 0)]
    pub scenario_seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Enriched unit CSV; a synthetic scenario is generated when omitted.
    #[arg(long)]
    pub units: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioFlags,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "random,stratified,spatial,dual"
    )]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.8)]
    pub dense_fraction: f64,
    #[arg(long, default_value = "auto")]
    pub threshold: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub anneal: AnnealArgs,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub jobs: usize,
    /// Record wall-clock time per run (makes the report non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ScenarioArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioFlags,
    #[arg(long)]
    pub units_out: PathBuf,
    #[arg(long)]
    pub pois_out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Binary,
    Kappa,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub mode: EvalMode,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Class map (`class_id,class_name`); required for kappa.
    #[arg(long)]
    pub classes: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ResolveArgs {
    /// Instance pixel CSV (`instance_id,class_id,count`).
    #[arg(long)]
    pub pixels: PathBuf,
    #[arg(long)]
    pub classes: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

pub fn run(argv: &[String]) -> Result<(), CliError> {
    run_with(argv, &mut std::io::stdout())
}

/// Like [`run`], writing the human-readable summary to `out`. Usage errors
/// carry the help text of the offending subcommand.
pub fn run_with(argv: &[String], out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return Ok(());
            }
            return Err(with_help(e.render().to_string(), argv));
        }
    };
    commands::dispatch(cli.command, &argv[1..], out).map_err(|e| match e {
        CliError::Usage(m) => with_help(format!("error: {m}\n"), argv),
        data => data,
    })
}

fn with_help(message: String, argv: &[String]) -> CliError {
    use clap::CommandFactory;
    let mut root = Cli::command();
    root.build();
    let help = match argv.get(1).and_then(|name| root.find_subcommand_mut(name)) {
        Some(sub) => sub.render_help(),
        None => root.render_help(),
    };
    CliError::Usage(format!("{}\n{help}", message.trim_end()))
}
