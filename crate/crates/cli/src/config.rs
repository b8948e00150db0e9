//! Run configuration: one JSON document covering every subcommand.
//!
//! The same schema backs `--config` files and command-line flags; flags
//! override file values field by field. Unknown keys in a config file are
//! rejected so typos fail loudly instead of silently running defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::errors::{Classify, Result};

/// Which closed-form/iterative trainer a command uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Closed-form per-bin ridge solution over the full window.
    Mosse,
    /// Boundary-aware constrained solver (splitting iterations).
    Cflb,
}

/// Which dataset family `synth` generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// Still images with one planted target plus distractors; train/test split.
    Localization,
    /// A frame sequence with a textured patch translating over clutter.
    Tracking,
}

/// Motion pattern for synthetic tracking sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    /// Constant velocity along the main diagonal.
    Diagonal,
    /// Constant speed with periodic direction reversals.
    Zigzag,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed: every random choice in a run derives from it.
    pub seed: u64,
    /// Worker threads for benchmark cells; 0 means one per core.
    pub threads: usize,
    /// Directory reports and datasets are written into.
    pub out_dir: PathBuf,
    pub train: TrainConfig,
    pub localize_bench: LocalizeBenchConfig,
    pub convergence_bench: ConvergenceBenchConfig,
    pub track_bench: TrackBenchConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            threads: 0,
            out_dir: PathBuf::from("out"),
            train: TrainConfig::default(),
            localize_bench: LocalizeBenchConfig::default(),
            convergence_bench: ConvergenceBenchConfig::default(),
            track_bench: TrackBenchConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

/// `train` subcommand: fit one filter from a directory of images.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Directory of training images (.pgm/.png).
    pub inputs: Option<PathBuf>,
    /// Optional annotation table giving the target center per image;
    /// defaults to the image center.
    pub annotations: Option<PathBuf>,
    pub solver: SolverKind,
    /// Filter support; both default to the full image (required for mosse).
    pub filter_height: Option<usize>,
    pub filter_width: Option<usize>,
    /// Force the constrained solver's support to cover the whole window.
    pub mask_equals_image: bool,
    pub lambda: f64,
    /// Splitting-iteration budget for the constrained solver.
    pub admm_iters: usize,
    /// Early-stop tolerance on the constraint gap.
    pub rel_tol: f64,
    /// Desired-response width: sigma = sqrt(support area) / divisor.
    pub response_sigma_divisor: f64,
    /// Zero-mean/unit-variance normalization plus cosine window on inputs.
    pub preprocess: bool,
    /// Output path for the model container (default `<out_dir>/model.cflb`).
    pub model_out: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            inputs: None,
            annotations: None,
            solver: SolverKind::Cflb,
            filter_height: None,
            filter_width: None,
            mask_equals_image: false,
            lambda: 1e-2,
            admm_iters: 50,
            rel_tol: 1e-6,
            response_sigma_divisor: 16.0,
            preprocess: true,
            model_out: None,
        }
    }
}

/// `localize-bench`: sweep training-set size and window/support ratio on a
/// synthetic localization dataset and report success rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizeBenchConfig {
    /// Dataset directory produced by `synth --kind localization`.
    pub dataset: Option<PathBuf>,
    /// Training-set sizes to sweep.
    pub train_sizes: Vec<usize>,
    /// Window/support side ratios to sweep (1.0 = support fills the window).
    pub ratios: Vec<f64>,
    /// Independent repetitions (different training subsets); rates average.
    pub runs: usize,
    /// Normalized-distance grid for the success-vs-threshold curve.
    pub threshold_min: f64,
    pub threshold_max: f64,
    pub threshold_step: f64,
    /// Threshold the summary tables quote rates at.
    pub report_threshold: f64,
    pub lambda: f64,
    pub admm_iters: usize,
    pub response_sigma_divisor: f64,
}

impl Default for LocalizeBenchConfig {
    fn default() -> Self {
        LocalizeBenchConfig {
            dataset: None,
            train_sizes: vec![1, 2, 8],
            ratios: vec![1.0, 2.0],
            runs: 3,
            threshold_min: 0.01,
            threshold_max: 0.25,
            threshold_step: 0.01,
            report_threshold: 0.1,
            lambda: 1e-2,
            admm_iters: 20,
            response_sigma_divisor: 16.0,
        }
    }
}

/// `convergence-bench`: cost and accuracy of the solvers as the number of
/// training exemplars grows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceBenchConfig {
    /// Square window side.
    pub window: usize,
    /// Square filter-support side.
    pub filter: usize,
    /// Exemplar counts to sweep.
    pub n_sweep: Vec<usize>,
    /// Independent instances per cell; costs and accuracies average.
    pub instances: usize,
    pub lambda: f64,
    /// Relative objective tolerance (vs the exact solution) that
    /// iterations-to-tolerance counts against.
    pub rel_tol: f64,
    /// Splitting-iteration budget per solve.
    pub max_iters: usize,
    /// Gradient-descent iteration budget for the baseline column.
    pub gd_iters: usize,
}

impl Default for ConvergenceBenchConfig {
    fn default() -> Self {
        ConvergenceBenchConfig {
            window: 16,
            filter: 8,
            n_sweep: vec![1, 2, 4, 8, 16, 32, 64],
            instances: 3,
            lambda: 1e-2,
            rel_tol: 1e-3,
            max_iters: 20,
            gd_iters: 4000,
        }
    }
}

/// `track-bench`: run the online tracker over a frame directory against a
/// ground-truth table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackBenchConfig {
    /// Directory of frames, ordered by the number embedded in each name.
    pub frames: Option<PathBuf>,
    /// Ground-truth table (`frame,row,col[,height,width]`).
    pub ground_truth: Option<PathBuf>,
    /// Target box size; falls back to the table's size columns.
    pub box_height: Option<usize>,
    pub box_width: Option<usize>,
    pub lambda: f64,
    /// Energy learning rate per frame.
    pub eta: f64,
    /// Splitting iterations per frame refresh.
    pub admm_iters: usize,
    /// Search window side as a multiple of the box side.
    pub search_scale: f64,
    pub response_sigma_divisor: f64,
    /// Precision curve covers 1..=threshold_max pixels, step 1.
    pub threshold_max: usize,
    /// Dump the response map every k frames as PGM (0 disables).
    pub dump_every: usize,
}

impl Default for TrackBenchConfig {
    fn default() -> Self {
        TrackBenchConfig {
            frames: None,
            ground_truth: None,
            box_height: None,
            box_width: None,
            lambda: 1e-2,
            eta: 0.025,
            admm_iters: 4,
            search_scale: 2.0,
            response_sigma_divisor: 16.0,
            threshold_max: 50,
            dump_every: 0,
        }
    }
}

/// `synth`: generate a seeded dataset (localization suite or tracking
/// sequence) with exact annotations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub kind: SynthKind,
    // Localization suites.
    pub train_count: usize,
    pub test_count: usize,
    pub image_size: usize,
    pub template_size: usize,
    pub distractors: usize,
    /// Opacity of distractor copies (0 removes them entirely).
    pub distractor_contrast: f64,
    /// Amplitude of the smoothed background clutter.
    pub clutter: f64,
    // Tracking sequences.
    pub frames: usize,
    pub frame_size: usize,
    /// Side of the tracked patch. Odd values keep the patch's appearance
    /// center on the pixel grid and aligned with the box-center convention
    /// (top-left + size/2); even values put it half a pixel off, which makes
    /// the correlation peak ambiguous between neighboring cells and shows up
    /// as a constant one-pixel tracking offset.
    pub patch_size: usize,
    /// Target speed in pixels per frame.
    pub step_px: f64,
    pub motion: MotionKind,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            kind: SynthKind::Localization,
            train_count: 16,
            test_count: 200,
            image_size: 48,
            template_size: 12,
            distractors: 3,
            distractor_contrast: 0.5,
            clutter: 0.3,
            frames: 60,
            frame_size: 96,
            patch_size: 25,
            step_px: 2.0,
            motion: MotionKind::Diagonal,
        }
    }
}

/// Load a config file, rejecting unknown keys.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).input(&format!("reading {}", path.display()))?;
    serde_json::from_str(&text).input(&format!("parsing {}", path.display()))
}
