//! Online tracking: initialize a filter on one frame, then localize and
//! adapt frame by frame.
//!
//! The tracker keeps a search window (the target box scaled up by
//! `search_scale`) centered on its current estimate. Each step it
//! correlates the preprocessed window against the current filter, moves the
//! estimate by the response peak's wrapped displacement, folds the window
//! at the new position into its energy statistics with an exponential
//! moving average, and re-solves the filter with a few warm-started
//! splitting iterations. With adaptation rate zero the statistics never
//! change and the warm-started solver sits at its fixed point, so the
//! filter stays (numerically) frozen — a useful control setting.
//!
//! Signal-quality problems during stepping (a flat window, a degenerate
//! response) never abort a run: the tracker holds its estimate, reports a
//! zero quality score for the frame, and skips adaptation.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clock::NullClock;
use crate::detect::{psr, ResponseMap};
use crate::error::{Error, Result};
use crate::signal::{MaskSpec, ShiftVec, Signal2D};
use crate::solvers::admm::{self, AdmmParams, WarmStart};
use crate::solvers::{normal, FilterModel};
use crate::spectral::{dft2, idft2, SpectralEnergies, Spectrum2D};

/// Axis-aligned box: integer top-left corner (may sit outside the frame
/// while clamped windows still resolve) and a fixed size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub row: isize,
    pub col: isize,
    pub height: usize,
    pub width: usize,
}

impl BoundingBox {
    pub fn new(row: isize, col: isize, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter {
                name: "bbox",
                message: "box dimensions must be positive",
            });
        }
        Ok(Self {
            row,
            col,
            height,
            width,
        })
    }

    /// Center pixel, rounding toward the top-left for even sizes.
    pub fn center(&self) -> (isize, isize) {
        (
            self.row + (self.height / 2) as isize,
            self.col + (self.width / 2) as isize,
        )
    }

    pub fn from_center(center: (isize, isize), height: usize, width: usize) -> Result<Self> {
        Self::new(
            center.0 - (height / 2) as isize,
            center.1 - (width / 2) as isize,
            height,
            width,
        )
    }
}

/// Knobs for [`Tracker::init`]. The defaults are the configuration the
/// benchmarks run with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerParams {
    /// Ridge weight of the per-frame filter solve.
    pub lambda: f64,
    /// Exponential moving-average rate folding new frames into the energy
    /// statistics; zero freezes the model after initialization.
    pub eta: f64,
    /// Warm-started solver iterations per frame (run exactly, no early stop).
    pub admm_iters: usize,
    /// Search window size as a multiple of the target box.
    pub search_scale: f64,
    /// Number of warped copies of the first window added at initialization.
    pub init_perturbations: usize,
    /// Seed for the perturbation draws.
    pub seed: u64,
    /// Target response width: `sigma = sqrt(box_h * box_w) / divisor`.
    pub response_sigma_divisor: f64,
    /// Perturbation rotation range, +/- degrees.
    pub rotation_jitter_deg: f64,
    /// Perturbation scale range, `[1 - s, 1 + s]`.
    pub scale_jitter: f64,
    /// Perturbation translation range, +/- pixels per axis.
    pub translation_jitter_px: f64,
    /// Peak exclusion radius for the per-frame quality score.
    pub psr_exclusion_radius: usize,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            eta: 0.025,
            admm_iters: 4,
            search_scale: 2.0,
            init_perturbations: 8,
            seed: 7,
            response_sigma_divisor: 16.0,
            rotation_jitter_deg: 5.0,
            scale_jitter: 0.05,
            translation_jitter_px: 2.0,
            psr_exclusion_radius: 5,
        }
    }
}

impl TrackerParams {
    pub fn validate(&self) -> Result<()> {
        if self.lambda <= 0.0 || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                message: "ridge weight must be positive and finite",
            });
        }
        if !(0.0..=1.0).contains(&self.eta) || !self.eta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "eta",
                message: "adaptation rate must lie in [0, 1]",
            });
        }
        if self.admm_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "admm_iters",
                message: "at least one solver iteration per frame is required",
            });
        }
        if self.search_scale < 1.0 || !self.search_scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "search_scale",
                message: "search window must be at least the target box",
            });
        }
        if self.response_sigma_divisor <= 0.0 || !self.response_sigma_divisor.is_finite() {
            return Err(Error::InvalidParameter {
                name: "response_sigma_divisor",
                message: "must be positive and finite",
            });
        }
        if !self.rotation_jitter_deg.is_finite()
            || !self.scale_jitter.is_finite()
            || !self.translation_jitter_px.is_finite()
            || self.rotation_jitter_deg < 0.0
            || self.scale_jitter < 0.0
            || self.scale_jitter >= 1.0
            || self.translation_jitter_px < 0.0
        {
            return Err(Error::InvalidParameter {
                name: "jitter",
                message: "jitter ranges must be nonnegative (scale jitter below 1)",
            });
        }
        if self.psr_exclusion_radius == 0 {
            return Err(Error::InvalidParameter {
                name: "psr_exclusion_radius",
                message: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// Per-frame outcome: the updated center estimate (frame coordinates) and
/// the response quality score (zero when the frame was degenerate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub center: (usize, usize),
    pub psr: f64,
}

/// Affine warp (rotation about the grid center, isotropic scale, then
/// translation) resampled with clamped bilinear lookups. Used to
/// synthesize extra training views of the first window.
pub fn warp_affine(
    source: &Signal2D,
    angle_rad: f64,
    scale: f64,
    translation: (f64, f64),
) -> Result<Signal2D> {
    if !angle_rad.is_finite()
        || scale <= 0.0
        || !scale.is_finite()
        || !translation.0.is_finite()
        || !translation.1.is_finite()
    {
        return Err(Error::InvalidParameter {
            name: "warp",
            message: "angle, scale, and translation must be finite (scale positive)",
        });
    }
    let (h, w) = source.shape();
    let cy = (h - 1) as f64 / 2.0;
    let cx = (w - 1) as f64 / 2.0;
    // Inverse mapping: undo translation, rotate by -angle, unscale.
    let cos = libm::cos(-angle_rad);
    let sin = libm::sin(-angle_rad);
    let inv_scale = 1.0 / scale;
    Signal2D::from_fn(h, w, |i, j| {
        let dy = i as f64 - cy - translation.0;
        let dx = j as f64 - cx - translation.1;
        let ry = cos * dy - sin * dx;
        let rx = sin * dy + cos * dx;
        source.sample_bilinear(cy + inv_scale * ry, cx + inv_scale * rx)
    })
}

/// Online correlation tracker. See the module docs for the loop structure.
#[derive(Debug, Clone)]
pub struct Tracker {
    params: TrackerParams,
    mask: MaskSpec,
    window_shape: (usize, usize),
    frame_shape: (usize, usize),
    bbox: BoundingBox,
    energies: SpectralEnergies,
    response_energy: f64,
    filter: Signal2D,
    multiplier: Spectrum2D,
    padded_spectrum: Spectrum2D,
    taper: Signal2D,
    base_response: Signal2D,
    anchor: (usize, usize),
    frame_index: usize,
    last_psr: f64,
}

impl Tracker {
    /// Builds the search geometry, synthesizes the initial training set from
    /// the first frame, and solves the filter to convergence.
    pub fn init(frame: &Signal2D, bbox: BoundingBox, params: TrackerParams) -> Result<Self> {
        params.validate()?;
        if bbox.height < 8 || bbox.width < 8 {
            return Err(Error::InvalidParameter {
                name: "bbox",
                message: "target box must be at least 8x8",
            });
        }
        let center = bbox.center();
        if center.0 < 0
            || center.1 < 0
            || center.0 >= frame.height() as isize
            || center.1 >= frame.width() as isize
        {
            return Err(Error::OutOfBounds {
                context: "Tracker::init: box center outside the frame",
            });
        }
        let window_shape = (
            scaled_len(bbox.height, params.search_scale),
            scaled_len(bbox.width, params.search_scale),
        );
        let mask = MaskSpec::centered(window_shape, (bbox.height, bbox.width))?;
        let taper = Signal2D::cosine_window(window_shape.0, window_shape.1)?;

        // The response target: a wrapped Gaussian whose peak sits at the
        // shift that aligns the filter support with the target patch. With
        // the window centered on the target that shift is a constant of the
        // geometry (zero for even sizes).
        let patch_top_left = (
            window_shape.0 / 2 - bbox.height / 2,
            window_shape.1 / 2 - bbox.width / 2,
        );
        let anchor = (
            patch_top_left.0 - mask.offset().0,
            patch_top_left.1 - mask.offset().1,
        );
        let sigma = libm::sqrt((bbox.height * bbox.width) as f64) / params.response_sigma_divisor;
        let centered = Signal2D::gaussian_response(
            window_shape.0,
            window_shape.1,
            ((window_shape.0 / 2) as f64, (window_shape.1 / 2) as f64),
            sigma,
        )?;
        let base_response = centered.circular_shift(ShiftVec::new(
            anchor.0 as isize - (window_shape.0 / 2) as isize,
            anchor.1 as isize - (window_shape.1 / 2) as isize,
        ));

        // Initial training set: the window itself plus jittered warps of
        // it. A warp translates the content, so its target peak moves with
        // it — supervising every warp at the base anchor would bias the
        // solution by the sample mean of the translation draws (up to half
        // a pixel), which the argmax then quantizes into a persistent
        // one-pixel tracking offset.
        let origin = (
            center.0 - (window_shape.0 / 2) as isize,
            center.1 - (window_shape.1 / 2) as isize,
        );
        let raw = frame.clamped_window(origin, window_shape)?;
        let base = preprocess(&raw, &taper).ok_or(Error::Degenerate {
            context: "Tracker::init: flat search window",
        })?;
        let mut exemplars = alloc::vec![base];
        let mut targets = alloc::vec![base_response.clone()];
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        for _ in 0..params.init_perturbations {
            let angle =
                jitter(&mut rng, params.rotation_jitter_deg) * core::f64::consts::PI / 180.0;
            let scale = 1.0 + jitter(&mut rng, params.scale_jitter);
            let translation = (
                jitter(&mut rng, params.translation_jitter_px),
                jitter(&mut rng, params.translation_jitter_px),
            );
            let warped = warp_affine(&raw, angle, scale, translation)?;
            if let Some(view) = preprocess(&warped, &taper) {
                let shifted_peak = Signal2D::gaussian_response(
                    window_shape.0,
                    window_shape.1,
                    (
                        (window_shape.0 / 2) as f64 + translation.0,
                        (window_shape.1 / 2) as f64 + translation.1,
                    ),
                    sigma,
                )?;
                exemplars.push(view);
                targets.push(shifted_peak.circular_shift(ShiftVec::new(
                    anchor.0 as isize - (window_shape.0 / 2) as isize,
                    anchor.1 as isize - (window_shape.1 / 2) as isize,
                )));
            }
        }
        let summed = SpectralEnergies::accumulate(&exemplars, &targets)?;
        let energies = summed.scaled(1.0 / exemplars.len() as f64).with_count(1);
        let size = (window_shape.0 * window_shape.1) as f64;
        let response_energy = size * base_response.norm_sq();

        // Solve the initial model exactly (matrix-free conjugate gradients)
        // and pair it with its stationary multiplier: per-frame refreshes
        // then warm-start from a true fixed point of the splitting solver
        // and only have to track the energy drift.
        let solved = normal::solve(&energies, &mask, params.lambda, 1e-12, 100_000)?;
        let filter = solved.filter;
        let multiplier = admm::stationary_multiplier(&energies, &mask, &filter)?;
        let padded_spectrum = dft2(&mask.pad(&filter)?);

        let mut tracker = Self {
            params,
            mask,
            window_shape,
            frame_shape: frame.shape(),
            bbox,
            energies,
            response_energy,
            filter,
            multiplier,
            padded_spectrum,
            taper,
            base_response,
            anchor,
            frame_index: 0,
            last_psr: 0.0,
        };
        // Score the first frame for reporting purposes.
        tracker.last_psr = tracker
            .respond(&raw)
            .and_then(|map| psr(&map, tracker.params.psr_exclusion_radius).ok())
            .unwrap_or(0.0);
        Ok(tracker)
    }

    /// Localizes the target in the next frame and adapts the filter.
    /// Only a frame of the wrong size is an error; degenerate signal
    /// conditions degrade gracefully (see the module docs).
    pub fn step(&mut self, frame: &Signal2D) -> Result<StepReport> {
        if frame.shape() != self.frame_shape {
            return Err(Error::ShapeMismatch {
                context: "Tracker::step frame",
                expected: self.frame_shape,
                got: frame.shape(),
            });
        }
        self.frame_index += 1;
        let center = self.bbox.center();
        let origin = (
            center.0 - (self.window_shape.0 / 2) as isize,
            center.1 - (self.window_shape.1 / 2) as isize,
        );
        let raw = frame.clamped_window(origin, self.window_shape)?;
        let (report, adapted_window) = match self.respond(&raw) {
            Some(map) => {
                let delta = self.wrapped_displacement(map.peak());
                let new_center = (
                    (center.0 + delta.0).clamp(0, self.frame_shape.0 as isize - 1),
                    (center.1 + delta.1).clamp(0, self.frame_shape.1 as isize - 1),
                );
                self.bbox =
                    BoundingBox::from_center(new_center, self.bbox.height, self.bbox.width)?;
                let quality = psr(&map, self.params.psr_exclusion_radius).unwrap_or(0.0);
                let report = StepReport {
                    center: (new_center.0 as usize, new_center.1 as usize),
                    psr: quality,
                };
                // Re-extract at the updated position for adaptation.
                let new_origin = (
                    new_center.0 - (self.window_shape.0 / 2) as isize,
                    new_center.1 - (self.window_shape.1 / 2) as isize,
                );
                let updated = frame.clamped_window(new_origin, self.window_shape)?;
                (report, preprocess(&updated, &self.taper))
            }
            None => {
                // Flat or degenerate window: hold position, skip adaptation.
                let report = StepReport {
                    center: (
                        center.0.clamp(0, self.frame_shape.0 as isize - 1) as usize,
                        center.1.clamp(0, self.frame_shape.1 as isize - 1) as usize,
                    ),
                    psr: 0.0,
                };
                (report, None)
            }
        };
        if let Some(window) = adapted_window {
            self.adapt(&window)?;
        }
        self.last_psr = report.psr;
        Ok(report)
    }

    fn adapt(&mut self, window: &Signal2D) -> Result<()> {
        let eta = self.params.eta;
        self.energies.ema_update(window, &self.base_response, eta)?;
        let size = (self.window_shape.0 * self.window_shape.1) as f64;
        self.response_energy =
            (1.0 - eta) * self.response_energy + eta * size * self.base_response.norm_sq();
        let solve = AdmmParams {
            max_iters: self.params.admm_iters,
            rel_tol: 0.0,
            ..AdmmParams::default()
        };
        let warm = WarmStart {
            filter: self.filter.clone(),
            multiplier: self.multiplier.clone(),
        };
        let state = admm::train_with_energies(
            &self.energies,
            self.response_energy,
            &self.mask,
            self.params.lambda,
            &solve,
            Some(&warm),
            &NullClock,
        )?;
        self.filter = state.filter;
        self.multiplier = state.multiplier;
        self.padded_spectrum = dft2(&self.mask.pad(&self.filter)?);
        Ok(())
    }

    /// Preprocesses a window and correlates it against the current filter.
    /// Returns `None` when the window is flat or the response is unusable.
    fn respond(&self, raw: &Signal2D) -> Option<ResponseMap> {
        let window = preprocess(raw, &self.taper)?;
        let spectrum = dft2(&window).hadamard(&self.padded_spectrum.conj()).ok()?;
        let response = idft2(&spectrum).ok()?;
        Some(ResponseMap::from_response(response))
    }

    /// Signed displacement from the training anchor, wrapped to the nearest
    /// equivalent on the periodic window.
    fn wrapped_displacement(&self, peak: (usize, usize)) -> (isize, isize) {
        let wrap = |p: usize, a: usize, len: usize| -> isize {
            let len = len as isize;
            let mut d = (p as isize - a as isize).rem_euclid(len);
            if d > len / 2 {
                d -= len;
            }
            d
        };
        (
            wrap(peak.0, self.anchor.0, self.window_shape.0),
            wrap(peak.1, self.anchor.1, self.window_shape.1),
        )
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn window_shape(&self) -> (usize, usize) {
        self.window_shape
    }

    pub fn mask(&self) -> &MaskSpec {
        &self.mask
    }

    pub fn params(&self) -> &TrackerParams {
        &self.params
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    /// Quality score of the most recent frame (zero before any detection).
    pub fn last_psr(&self) -> f64 {
        self.last_psr
    }

    pub fn filter(&self) -> &Signal2D {
        &self.filter
    }

    /// Packages the current filter and statistics for persistence.
    pub fn model(&self) -> Result<FilterModel> {
        FilterModel::new(
            self.filter.clone(),
            self.energies.clone(),
            self.mask,
            self.params.lambda,
        )
    }
}

/// Search-window side for a box side, forced to the box's parity: the
/// centered mask offset `(T-D)/2`, the patch top-left `T/2 - D/2`, and the
/// cosine taper's center `(T-1)/2` only coincide on one pixel when `T` and
/// `D` have equal parity. A mixed-parity window splits those centers by half
/// a pixel, which makes the correlation argmax ambiguous between neighboring
/// cells and shows up as a persistent one-pixel tracking offset.
fn scaled_len(len: usize, scale: f64) -> usize {
    let mut scaled = libm::round(len as f64 * scale) as usize;
    if scaled % 2 != len % 2 {
        scaled += 1;
    }
    scaled.max(len).max(2)
}

fn jitter(rng: &mut ChaCha8Rng, magnitude: f64) -> f64 {
    if magnitude == 0.0 {
        0.0
    } else {
        rng.gen_range(-magnitude..magnitude)
    }
}

/// Zero-mean/unit-variance normalization followed by the cosine taper;
/// `None` when the window has no variance to normalize.
fn preprocess(window: &Signal2D, taper: &Signal2D) -> Option<Signal2D> {
    window
        .power_normalize()
        .and_then(|n| n.hadamard(taper))
        .ok()
}

/// One frame of a finished tracking run, as consumed by the evaluation
/// helpers: predicted and (optional) annotated centers in frame
/// coordinates, the per-frame quality score, and the wall-clock seconds
/// the step took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRecord {
    pub frame_index: usize,
    pub predicted: (f64, f64),
    pub truth: Option<(f64, f64)>,
    pub psr: f64,
    pub seconds: f64,
}

/// Evaluation of a tracking run against its annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSummary {
    /// `(threshold, fraction of frames with center error <= threshold)`.
    pub curve: Vec<(f64, f64)>,
    /// Mean Euclidean center error over all frames.
    pub mean_error: f64,
    /// Frames per second over the recorded step times (zero if no time was
    /// recorded).
    pub fps: f64,
}

/// Precision curve, mean error, and throughput for a recorded run. Every
/// frame must carry an annotation; thresholds are inclusive.
pub fn precision_curve(frames: &[FrameRecord], thresholds: &[f64]) -> Result<TrackSummary> {
    if frames.is_empty() {
        return Err(Error::EmptyInput {
            context: "precision_curve frames",
        });
    }
    if thresholds.is_empty() {
        return Err(Error::EmptyInput {
            context: "precision_curve thresholds",
        });
    }
    let mut errors = Vec::with_capacity(frames.len());
    let mut total_seconds = 0.0;
    for frame in frames {
        let truth = frame.truth.ok_or(Error::Degenerate {
            context: "precision_curve: frame without an annotation",
        })?;
        errors.push(libm::hypot(
            frame.predicted.0 - truth.0,
            frame.predicted.1 - truth.1,
        ));
        total_seconds += frame.seconds;
    }
    let curve = thresholds
        .iter()
        .map(|t| {
            let hits = errors.iter().filter(|e| **e <= *t).count();
            (*t, hits as f64 / errors.len() as f64)
        })
        .collect();
    let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
    let fps = if total_seconds > 0.0 {
        frames.len() as f64 / total_seconds
    } else {
        0.0
    };
    Ok(TrackSummary {
        curve,
        mean_error,
        fps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    /// A frame with a bright Gaussian blob at `center` over a textured
    /// background (textured so windows are never flat).
    fn blob_frame(shape: (usize, usize), center: (f64, f64)) -> Signal2D {
        Signal2D::from_fn(shape.0, shape.1, |i, j| {
            let texture = 0.05 * libm::sin(0.7 * i as f64) * libm::cos(0.9 * j as f64);
            let dy = i as f64 - center.0;
            let dx = j as f64 - center.1;
            texture + libm::exp(-(dy * dy + dx * dx) / (2.0 * 9.0))
        })
        .unwrap()
    }

    #[test]
    fn init_validates_geometry() {
        let frame = blob_frame((64, 64), (32.0, 32.0));
        let tiny = BoundingBox::new(30, 30, 4, 4).unwrap();
        assert!(Tracker::init(&frame, tiny, TrackerParams::default()).is_err());
        let outside = BoundingBox::new(200, 200, 16, 16).unwrap();
        assert!(Tracker::init(&frame, outside, TrackerParams::default()).is_err());
        let good = BoundingBox::from_center((32, 32), 16, 16).unwrap();
        let tracker = Tracker::init(&frame, good, TrackerParams::default()).unwrap();
        assert_eq!(tracker.window_shape(), (32, 32));
        assert_eq!(tracker.mask().inner(), (16, 16));
    }

    #[test]
    fn follows_a_moving_blob() {
        let shape = (64, 64);
        let mut pos = (28.0, 30.0);
        let frame = blob_frame(shape, pos);
        let bbox = BoundingBox::from_center((28, 30), 16, 16).unwrap();
        let mut tracker = Tracker::init(&frame, bbox, TrackerParams::default()).unwrap();
        for step in 0..12 {
            pos = (pos.0 + 1.0, pos.1 + if step % 2 == 0 { 2.0 } else { -1.0 });
            let report = tracker.step(&blob_frame(shape, pos)).unwrap();
            let err = libm::hypot(
                report.center.0 as f64 - pos.0,
                report.center.1 as f64 - pos.1,
            );
            assert!(err <= 1.5, "step {step}: error {err} at {pos:?}");
            assert!(report.psr > 3.0, "step {step}: psr {}", report.psr);
        }
    }

    #[test]
    fn frozen_rate_keeps_the_filter_fixed() {
        let shape = (64, 64);
        let frame = blob_frame(shape, (32.0, 32.0));
        let bbox = BoundingBox::from_center((32, 32), 16, 16).unwrap();
        let params = TrackerParams {
            eta: 0.0,
            ..TrackerParams::default()
        };
        let mut tracker = Tracker::init(&frame, bbox, params).unwrap();
        let frozen: Vec<f64> = tracker.filter().samples().to_vec();
        for _ in 0..5 {
            tracker.step(&frame).unwrap();
        }
        let drift = tracker
            .filter()
            .samples()
            .iter()
            .zip(&frozen)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        assert!(drift < 1e-18, "filter drifted by {drift:e}");
    }

    #[test]
    fn flat_frames_degrade_gracefully() {
        let shape = (64, 64);
        let frame = blob_frame(shape, (32.0, 32.0));
        let bbox = BoundingBox::from_center((32, 32), 16, 16).unwrap();
        let mut tracker = Tracker::init(&frame, bbox, TrackerParams::default()).unwrap();
        let filter_before: Vec<f64> = tracker.filter().samples().to_vec();
        let flat = Signal2D::zeros(shape.0, shape.1).unwrap();
        let report = tracker.step(&flat).unwrap();
        assert_eq!(report.psr, 0.0);
        assert_eq!(report.center, (32, 32)); // held position
        assert_eq!(tracker.filter().samples(), &filter_before[..]); // no adaptation
        let wrong_shape = Signal2D::zeros(32, 32).unwrap();
        assert!(tracker.step(&wrong_shape).is_err());
    }

    #[test]
    fn initialization_is_seed_deterministic() {
        let frame = blob_frame((64, 64), (30.0, 34.0));
        let bbox = BoundingBox::from_center((30, 34), 16, 16).unwrap();
        let a = Tracker::init(&frame, bbox, TrackerParams::default()).unwrap();
        let b = Tracker::init(&frame, bbox, TrackerParams::default()).unwrap();
        assert_eq!(a.filter().samples(), b.filter().samples());
        let c = Tracker::init(
            &frame,
            bbox,
            TrackerParams {
                seed: 99,
                ..TrackerParams::default()
            },
        )
        .unwrap();
        // A different seed draws different warps, hence a different filter.
        assert_ne!(a.filter().samples(), c.filter().samples());
    }

    #[test]
    fn warp_identity_is_exact_and_warps_are_finite() {
        let src = blob_frame((20, 20), (9.0, 11.0));
        let same = warp_affine(&src, 0.0, 1.0, (0.0, 0.0)).unwrap();
        for (a, b) in same.samples().iter().zip(src.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        let turned = warp_affine(&src, 0.1, 1.05, (1.5, -0.5)).unwrap();
        assert_eq!(turned.shape(), src.shape());
        assert!(warp_affine(&src, 0.0, 0.0, (0.0, 0.0)).is_err());
    }

    #[test]
    fn precision_curve_summarizes_a_run() {
        let frames = vec![
            FrameRecord {
                frame_index: 0,
                predicted: (10.0, 10.0),
                truth: Some((10.0, 10.0)),
                psr: 12.0,
                seconds: 0.01,
            },
            FrameRecord {
                frame_index: 1,
                predicted: (13.0, 14.0),
                truth: Some((10.0, 10.0)),
                psr: 8.0,
                seconds: 0.01,
            },
        ];
        let summary = precision_curve(&frames, &[1.0, 5.0, 20.0]).unwrap();
        assert_eq!(summary.curve[0], (1.0, 0.5));
        assert_eq!(summary.curve[1], (5.0, 1.0));
        assert!((summary.mean_error - 2.5).abs() < 1e-12);
        assert!((summary.fps - 100.0).abs() < 1e-9);

        let missing = vec![FrameRecord {
            frame_index: 0,
            predicted: (0.0, 0.0),
            truth: None,
            psr: 0.0,
            seconds: 0.0,
        }];
        assert!(precision_curve(&missing, &[1.0]).is_err());
        assert!(precision_curve(&[], &[1.0]).is_err());
    }
}
