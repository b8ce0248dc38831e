//! Batch front end for the topological gait-classification pipeline.

mod commands;
mod config;
mod plots;
mod util;

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use topogait::classify::MaxFeatures;
use topogait::descriptors::DescriptorKind;
use topogait::ingest::Variable;
use topogait::pipeline::{GridFit, StatePolicy, TaskPair};

#[derive(Parser, Debug)]
#[command(
    name = "topogait",
    version,
    about = "Foot-clearance series -> delay embedding -> Vietoris-Rips persistence -> topological descriptors -> random-forest LOOCV"
)]
struct Cli {
    /// Worker threads for parallel folds and grid cells (default: all cores).
    /// Results are identical for any worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic cohort dataset
    Generate(GenerateArgs),
    /// Dump delay-embedded point clouds for every series
    Embed(EmbedArgs),
    /// Compute capped persistence diagrams for every series
    Ph(PhArgs),
    /// Dump the feature matrix of one task cohort
    Featurize(FeaturizeArgs),
    /// Run one experiment end to end: report, features, diagrams, plots
    Classify(ClassifyArgs),
    /// Sweep variable subsets and states, ranking combinations by AUC
    Grid(GridArgs),
    /// Render saved report files as a summary table
    Report(ReportArgs),
}

/// Experiment parameters shared by featurize/classify/grid. Flags override
/// the config file; unset values fall back to the pinned defaults.
#[derive(Args, Debug, Clone)]
struct ExperimentArgs {
    /// Config file: TOML, JSON, or a previous report.json
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV (wide form, one row per series)
    #[arg(long)]
    dataset: Option<String>,
    /// Task: CO-vs-IPD, CO-vs-VaP, or IPD-vs-VaP
    #[arg(long, value_parser = TaskPair::from_str)]
    task: Option<TaskPair>,
    /// Patient state policy: Off, On, or Off+On
    #[arg(long, value_parser = StatePolicy::from_str)]
    state: Option<StatePolicy>,
    /// Comma-separated foot-clearance variables
    #[arg(long, value_delimiter = ',', value_parser = Variable::from_str)]
    vars: Option<Vec<Variable>>,
    /// Descriptor kind: BC, PL, or SL
    #[arg(long, value_parser = DescriptorKind::from_str)]
    descriptor: Option<DescriptorKind>,
    /// Grid points per homology degree
    #[arg(long)]
    nbins: Option<usize>,
    /// Embedding dimension
    #[arg(long)]
    dim: Option<usize>,
    /// Embedding delay
    #[arg(long)]
    tau: Option<usize>,
    /// Silhouette power p
    #[arg(long = "sil-p")]
    sil_p: Option<f64>,
    /// Landscape layer (1-based)
    #[arg(long)]
    layer: Option<usize>,
    /// Grid fitting scope per fold: fold (leakage-free) or all
    #[arg(long = "grid-fit", value_parser = GridFit::from_str)]
    grid_fit: Option<GridFit>,
    /// Z-score each series before embedding (default: raw values)
    #[arg(long, action = clap::ArgAction::SetTrue)]
    standardize: Option<bool>,
    /// RNG seed for forest training
    #[arg(long)]
    seed: Option<u64>,
    /// Trees per forest
    #[arg(long)]
    trees: Option<usize>,
    /// Split candidates per node: sqrt, all, or an integer
    #[arg(long = "max-features", value_parser = MaxFeatures::from_str)]
    max_features: Option<MaxFeatures>,
    /// Minimum samples per leaf
    #[arg(long = "min-leaf")]
    min_leaf: Option<usize>,
    /// Maximum tree depth (default unlimited)
    #[arg(long = "max-depth")]
    max_depth: Option<usize>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<config::RunConfig> {
        let file = match &self.config {
            Some(path) => config::load_config_file(path)?,
            None => config::PartialConfig::default(),
        };
        let overrides = config::Overrides {
            dataset: self.dataset.clone(),
            task: self.task,
            state: self.state,
            variables: self.vars.clone(),
            descriptor: self.descriptor,
            nbins: self.nbins,
            dim: self.dim,
            tau: self.tau,
            sil_p: self.sil_p,
            landscape_layer: self.layer,
            grid_fit: self.grid_fit,
            standardize: self.standardize.filter(|&b| b),
            seed: self.seed,
            trees: self.trees,
            max_features: self.max_features,
            min_leaf: self.min_leaf,
            max_depth: self.max_depth,
        };
        config::resolve(overrides, file)
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Number of classes: 2 (IPD/VaP) or 3 (CO/IPD/VaP)
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Subjects per class, comma-separated (defaults 15,14 or 15,15,14)
    #[arg(long, value_delimiter = ',')]
    subjects: Option<Vec<usize>>,
    /// Samples per series
    #[arg(long = "series-len", default_value_t = 36)]
    series_len: usize,
    /// Per-class sinusoid amplitude (single value broadcasts)
    #[arg(long, value_delimiter = ',')]
    amplitude: Option<Vec<f64>>,
    /// Per-class Gaussian noise level
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    /// Per-class samples per cycle
    #[arg(long, value_delimiter = ',')]
    period: Option<Vec<f64>>,
    /// Per-class second-harmonic amplitude
    #[arg(long, value_delimiter = ',')]
    harmonic: Option<Vec<f64>>,
    /// Per-class linear trend over the series
    #[arg(long, value_delimiter = ',')]
    trend: Option<Vec<f64>>,
    /// Noise multiplier for patients in the On state
    #[arg(long = "medication-gain", default_value_t = 0.5)]
    medication_gain: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output dataset file (default <outdir>/cohort.csv)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    /// Output CSV (default <outdir>/embedded.csv)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PhArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    /// Output directory for per-series diagram files (default <outdir>/diagrams)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FeaturizeArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Output CSV (default <outdir>/features.csv)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Output directory (default --out, then $TOPOGAIT_OUT, then ./topogait-out)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Variable-subset sizes to sweep, e.g. 2 or 2,3,4
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// States to sweep (defaults to the single configured state)
    #[arg(long, value_delimiter = ',', value_parser = StatePolicy::from_str)]
    states: Option<Vec<StatePolicy>>,
    /// Variable pool to draw subsets from (defaults to all six)
    #[arg(long, value_delimiter = ',', value_parser = Variable::from_str)]
    pool: Option<Vec<Variable>>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Report JSON files to render
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Generate(args) => commands::generate(args),
        Command::Embed(args) => commands::embed(args),
        Command::Ph(args) => commands::ph(args),
        Command::Featurize(args) => commands::featurize(args),
        Command::Classify(args) => commands::classify(args),
        Command::Grid(args) => commands::grid(args),
        Command::Report(args) => commands::report(args),
    }
}
