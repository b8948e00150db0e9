//! Command-line surface: argument parsing, config merging, and dispatch.
//!
//! Flags mirror the JSON config schema (kebab-case flag = snake_case key);
//! `--config` loads a file first and any flag passed on the command line
//! overrides the file's value. Exit codes are part of the contract:
//! `0` success, `2` input/usage error, `3` numerical error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{self, MotionKind, RunConfig, SolverKind, SynthKind};
use crate::errors::{Classify, Result};
use crate::harness;
use crate::report::Report;
use crate::synth;

#[derive(Parser)]
#[command(
    name = "corrfilt",
    version,
    about = "Boundary-aware correlation filters: training, localization and tracking benchmarks, synthetic data"
)]
pub struct Cli {
    /// JSON configuration file; explicit flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every random choice in the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for benchmark cells (0 = one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory reports and datasets are written into (created if missing).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Fit one filter from a directory of images and save the model.
    Train(TrainArgs),
    /// Success-rate sweep over training-set size and window/support ratio.
    LocalizeBench(LocalizeArgs),
    /// Solver cost and accuracy as the exemplar count grows.
    ConvergenceBench(ConvergenceArgs),
    /// Run the online tracker over a frame directory with ground truth.
    TrackBench(TrackArgs),
    /// Generate a seeded synthetic dataset with exact annotations.
    Synth(SynthArgs),
}

#[derive(Args)]
pub struct TrainArgs {
    /// Directory of training images (.pgm/.png).
    #[arg(long)]
    inputs: Option<PathBuf>,
    /// Annotation table with one target center per image.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// mosse = closed-form full-window ridge; cflb = constrained-support solver.
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    #[arg(long)]
    filter_height: Option<usize>,
    #[arg(long)]
    filter_width: Option<usize>,
    /// Constrained solver with the support covering the whole window.
    #[arg(long)]
    mask_equals_image: bool,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    admm_iters: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    response_sigma_divisor: Option<f64>,
    /// Skip input normalization and the cosine taper.
    #[arg(long)]
    no_preprocess: bool,
    /// Model container path (default `<out-dir>/model.cflb`).
    #[arg(long)]
    model_out: Option<PathBuf>,
}

impl TrainArgs {
    fn apply(&self, cfg: &mut config::TrainConfig) {
        if let Some(v) = &self.inputs {
            cfg.inputs = Some(v.clone());
        }
        if let Some(v) = &self.annotations {
            cfg.annotations = Some(v.clone());
        }
        if let Some(v) = self.solver {
            cfg.solver = v;
        }
        if let Some(v) = self.filter_height {
            cfg.filter_height = Some(v);
        }
        if let Some(v) = self.filter_width {
            cfg.filter_width = Some(v);
        }
        if self.mask_equals_image {
            cfg.mask_equals_image = true;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.admm_iters {
            cfg.admm_iters = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.response_sigma_divisor {
            cfg.response_sigma_divisor = v;
        }
        if self.no_preprocess {
            cfg.preprocess = false;
        }
        if let Some(v) = &self.model_out {
            cfg.model_out = Some(v.clone());
        }
    }
}

#[derive(Args)]
pub struct LocalizeArgs {
    /// Dataset directory produced by `synth --kind localization`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Training-set sizes, comma separated (e.g. 1,2,8).
    #[arg(long, value_delimiter = ',')]
    train_sizes: Option<Vec<usize>>,
    /// Window/support side ratios, comma separated (e.g. 1,2).
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    threshold_min: Option<f64>,
    #[arg(long)]
    threshold_max: Option<f64>,
    #[arg(long)]
    threshold_step: Option<f64>,
    #[arg(long)]
    report_threshold: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    admm_iters: Option<usize>,
    #[arg(long)]
    response_sigma_divisor: Option<f64>,
}

impl LocalizeArgs {
    fn apply(&self, cfg: &mut config::LocalizeBenchConfig) {
        if let Some(v) = &self.dataset {
            cfg.dataset = Some(v.clone());
        }
        if let Some(v) = &self.train_sizes {
            cfg.train_sizes = v.clone();
        }
        if let Some(v) = &self.ratios {
            cfg.ratios = v.clone();
        }
        if let Some(v) = self.runs {
            cfg.runs = v;
        }
        if let Some(v) = self.threshold_min {
            cfg.threshold_min = v;
        }
        if let Some(v) = self.threshold_max {
            cfg.threshold_max = v;
        }
        if let Some(v) = self.threshold_step {
            cfg.threshold_step = v;
        }
        if let Some(v) = self.report_threshold {
            cfg.report_threshold = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.admm_iters {
            cfg.admm_iters = v;
        }
        if let Some(v) = self.response_sigma_divisor {
            cfg.response_sigma_divisor = v;
        }
    }
}

#[derive(Args)]
pub struct ConvergenceArgs {
    /// Square window side.
    #[arg(long)]
    window: Option<usize>,
    /// Square filter-support side.
    #[arg(long)]
    filter: Option<usize>,
    /// Exemplar counts, comma separated (e.g. 1,10,100).
    #[arg(long, value_delimiter = ',')]
    n_sweep: Option<Vec<usize>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    gd_iters: Option<usize>,
}

impl ConvergenceArgs {
    fn apply(&self, cfg: &mut config::ConvergenceBenchConfig) {
        if let Some(v) = self.window {
            cfg.window = v;
        }
        if let Some(v) = self.filter {
            cfg.filter = v;
        }
        if let Some(v) = &self.n_sweep {
            cfg.n_sweep = v.clone();
        }
        if let Some(v) = self.instances {
            cfg.instances = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = self.gd_iters {
            cfg.gd_iters = v;
        }
    }
}

#[derive(Args)]
pub struct TrackArgs {
    /// Directory of frames, ordered by the number embedded in each name.
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Ground-truth table (`frame,row,col[,height,width]`).
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    #[arg(long)]
    box_height: Option<usize>,
    #[arg(long)]
    box_width: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    admm_iters: Option<usize>,
    #[arg(long)]
    search_scale: Option<f64>,
    #[arg(long)]
    response_sigma_divisor: Option<f64>,
    #[arg(long)]
    threshold_max: Option<usize>,
    /// Save a response-map PGM every k frames (0 disables).
    #[arg(long)]
    dump_every: Option<usize>,
}

impl TrackArgs {
    fn apply(&self, cfg: &mut config::TrackBenchConfig) {
        if let Some(v) = &self.frames {
            cfg.frames = Some(v.clone());
        }
        if let Some(v) = &self.ground_truth {
            cfg.ground_truth = Some(v.clone());
        }
        if let Some(v) = self.box_height {
            cfg.box_height = Some(v);
        }
        if let Some(v) = self.box_width {
            cfg.box_width = Some(v);
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.eta {
            cfg.eta = v;
        }
        if let Some(v) = self.admm_iters {
            cfg.admm_iters = v;
        }
        if let Some(v) = self.search_scale {
            cfg.search_scale = v;
        }
        if let Some(v) = self.response_sigma_divisor {
            cfg.response_sigma_divisor = v;
        }
        if let Some(v) = self.threshold_max {
            cfg.threshold_max = v;
        }
        if let Some(v) = self.dump_every {
            cfg.dump_every = v;
        }
    }
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Option<SynthKind>,
    #[arg(long)]
    train_count: Option<usize>,
    #[arg(long)]
    test_count: Option<usize>,
    #[arg(long)]
    image_size: Option<usize>,
    #[arg(long)]
    template_size: Option<usize>,
    #[arg(long)]
    distractors: Option<usize>,
    #[arg(long)]
    distractor_contrast: Option<f64>,
    #[arg(long)]
    clutter: Option<f64>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    frame_size: Option<usize>,
    #[arg(long)]
    patch_size: Option<usize>,
    #[arg(long)]
    step_px: Option<f64>,
    #[arg(long, value_enum)]
    motion: Option<MotionKind>,
}

impl SynthArgs {
    fn apply(&self, cfg: &mut config::SynthConfig) {
        if let Some(v) = self.kind {
            cfg.kind = v;
        }
        if let Some(v) = self.train_count {
            cfg.train_count = v;
        }
        if let Some(v) = self.test_count {
            cfg.test_count = v;
        }
        if let Some(v) = self.image_size {
            cfg.image_size = v;
        }
        if let Some(v) = self.template_size {
            cfg.template_size = v;
        }
        if let Some(v) = self.distractors {
            cfg.distractors = v;
        }
        if let Some(v) = self.distractor_contrast {
            cfg.distractor_contrast = v;
        }
        if let Some(v) = self.clutter {
            cfg.clutter = v;
        }
        if let Some(v) = self.frames {
            cfg.frames = v;
        }
        if let Some(v) = self.frame_size {
            cfg.frame_size = v;
        }
        if let Some(v) = self.patch_size {
            cfg.patch_size = v;
        }
        if let Some(v) = self.step_px {
            cfg.step_px = v;
        }
        if let Some(v) = self.motion {
            cfg.motion = v;
        }
    }
}

/// Resolve the effective configuration: file (if any), then global flags,
/// then the subcommand's flags.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => config::load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    if let Some(out_dir) = &cli.out_dir {
        cfg.out_dir = out_dir.clone();
    }
    match &cli.command {
        Command::Train(a) => a.apply(&mut cfg.train),
        Command::LocalizeBench(a) => a.apply(&mut cfg.localize_bench),
        Command::ConvergenceBench(a) => a.apply(&mut cfg.convergence_bench),
        Command::TrackBench(a) => a.apply(&mut cfg.track_bench),
        Command::Synth(a) => a.apply(&mut cfg.synth),
    }
    Ok(cfg)
}

fn finish(report: Report, cfg: &RunConfig, stem: &str) -> Result<()> {
    let written = report.write(&cfg.out_dir, stem)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Execute a parsed invocation. Everything after config resolution funnels
/// through here so tests can drive the binary's exact behavior in-process.
pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = effective_config(cli)?;
    std::fs::create_dir_all(&cfg.out_dir).input(&format!("creating {}", cfg.out_dir.display()))?;
    match &cli.command {
        Command::Train(_) => finish(harness::train::run(&cfg)?, &cfg, "train"),
        Command::LocalizeBench(_) => {
            let pool = harness::build_pool(cfg.threads)?;
            finish(harness::localize::run(&cfg, &pool)?, &cfg, "localize_bench")
        }
        Command::ConvergenceBench(_) => {
            let pool = harness::build_pool(cfg.threads)?;
            finish(
                harness::convergence::run(&cfg, &pool)?,
                &cfg,
                "convergence_bench",
            )
        }
        Command::TrackBench(_) => finish(harness::track::run(&cfg)?, &cfg, "track_bench"),
        Command::Synth(_) => {
            let root = synth::generate(&cfg.out_dir, cfg.seed, &cfg.synth)?;
            println!("wrote dataset under {}", root.display());
            Ok(())
        }
    }
}

/// Entry point for the binary: parse, run, map errors to the exit-code
/// contract.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => 0,
        Err(error) => {
            eprintln!("error: {error}");
            error.exit_code()
        }
    }
}
