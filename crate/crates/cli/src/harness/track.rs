//! Tracking benchmark: run the online tracker over a frame directory and
//! score it against a ground-truth table.
//!
//! Frame 0 initializes the tracker at the annotated box; every later frame
//! is one timed `step`. The report carries a per-frame table (errors and
//! quality scores — deterministic) plus a pixel-threshold precision curve;
//! wall-clock figures stay in `timings_seconds` and the raw traces.

use corrfilt_core::detect::correlate;
use corrfilt_core::signal::Signal2D;
use corrfilt_core::track::{precision_curve, BoundingBox, FrameRecord, Tracker, TrackerParams};
use serde_json::json;
use std::path::Path;

use crate::config::RunConfig;
use crate::errors::{Classify, CliError, Result};
use crate::formats::{list_images, read_annotations, read_image, write_pgm};
use crate::harness::threshold_grid;
use crate::report::{MetricTable, Report};
use crate::timing::timed;

/// Peak-normalize a response for visualization: affine map onto `[0, 1]`.
fn normalized_view(response: &Signal2D) -> Signal2D {
    let samples = response.samples();
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let (h, w) = response.shape();
    Signal2D::new(h, w, samples.iter().map(|v| (v - lo) / span).collect())
        .expect("response dimensions are positive")
}

/// Recompute the current model's response around its current center and
/// save it as a PGM (a diagnostic view of model quality, recomputed after
/// the frame's update).
fn dump_response(tracker: &Tracker, frame: &Signal2D, dir: &Path, index: usize) -> Result<()> {
    let model = tracker.model().numerical("packaging the live model")?;
    let window = tracker.window_shape();
    let center = tracker.bbox().center();
    let origin = (
        center.0 - (window.0 / 2) as isize,
        center.1 - (window.1 / 2) as isize,
    );
    let raw = frame
        .clamped_window(origin, window)
        .numerical("extracting the response window")?;
    let taper = Signal2D::cosine_window(window.0, window.1).numerical("cosine taper")?;
    let prepared = raw
        .power_normalize()
        .and_then(|n| n.hadamard(&taper))
        .unwrap_or(raw);
    let map = correlate(&model, &prepared).numerical("correlating for the response dump")?;
    std::fs::create_dir_all(dir).input(&format!("creating {}", dir.display()))?;
    write_pgm(
        &dir.join(format!("response_{index:04}.pgm")),
        &normalized_view(map.response()),
    )
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let tcfg = &cfg.track_bench;
    let frames_dir = tcfg
        .frames
        .as_ref()
        .ok_or_else(|| CliError::Input("track-bench requires --frames".into()))?;
    let gt_path = tcfg
        .ground_truth
        .as_ref()
        .ok_or_else(|| CliError::Input("track-bench requires --ground-truth".into()))?;

    let paths = list_images(frames_dir)?;
    let annotations = read_annotations(gt_path)?;
    if annotations.len() != paths.len() {
        return Err(CliError::input_at(
            frames_dir,
            format!(
                "{} frames but {} ground-truth rows",
                paths.len(),
                annotations.len()
            ),
        ));
    }
    let (box_h, box_w) = match (tcfg.box_height, tcfg.box_width, annotations[0].size) {
        (Some(h), Some(w), _) => (h, w),
        (None, None, Some(size)) => size,
        _ => {
            return Err(CliError::Input(
                "target box size: pass both --box-height and --box-width, or include \
                 height,width columns in the ground-truth table"
                    .into(),
            ))
        }
    };

    let first = read_image(&paths[0])?;
    let start = annotations[0].center;
    let bbox = BoundingBox::from_center(
        (start.0.round() as isize, start.1.round() as isize),
        box_h,
        box_w,
    )
    .input("ground-truth box")?;
    let params = TrackerParams {
        lambda: tcfg.lambda,
        eta: tcfg.eta,
        admm_iters: tcfg.admm_iters,
        search_scale: tcfg.search_scale,
        response_sigma_divisor: tcfg.response_sigma_divisor,
        seed: cfg.seed,
        ..TrackerParams::default()
    };
    let (tracker, init_seconds) = {
        let (res, secs) = timed(|| Tracker::init(&first, bbox, params));
        (res.numerical("initializing the tracker")?, secs)
    };
    let mut tracker = tracker;

    let mut records = Vec::with_capacity(paths.len());
    records.push(FrameRecord {
        frame_index: 0,
        predicted: (bbox.center().0 as f64, bbox.center().1 as f64),
        truth: Some(start),
        psr: 0.0,
        seconds: init_seconds,
    });
    let responses_dir = cfg.out_dir.join("responses");
    let mut step_seconds_total = 0.0;
    for (index, path) in paths.iter().enumerate().skip(1) {
        let frame = read_image(path)?;
        let (step, seconds) = {
            let (res, secs) = timed(|| tracker.step(&frame));
            (res.numerical("tracker step")?, secs)
        };
        step_seconds_total += seconds;
        records.push(FrameRecord {
            frame_index: index,
            predicted: (step.center.0 as f64, step.center.1 as f64),
            truth: Some(annotations[index].center),
            psr: step.psr,
            seconds,
        });
        if tcfg.dump_every > 0 && index % tcfg.dump_every == 0 {
            dump_response(&tracker, &frame, &responses_dir, index)?;
        }
    }

    let thresholds = threshold_grid(1.0, tcfg.threshold_max.max(1) as f64, 1.0)?;
    let summary =
        precision_curve(&records, &thresholds).numerical("computing the precision curve")?;

    let mut report = Report::new("track-bench", cfg.seed, 1, tcfg)?;
    let mut curve = MetricTable::new("precision_curve", &["threshold_px", "precision"]);
    for (threshold, fraction) in &summary.curve {
        curve.push_row(vec![json!(threshold), json!(fraction)]);
    }
    report.add_table(curve);

    let mut per_frame = MetricTable::new(
        "per_frame",
        &[
            "frame",
            "predicted_row",
            "predicted_col",
            "truth_row",
            "truth_col",
            "error_px",
            "psr",
        ],
    );
    for record in &records {
        let truth = record.truth.expect("all benchmark frames are annotated");
        let error = (record.predicted.0 - truth.0).hypot(record.predicted.1 - truth.1);
        per_frame.push_row(vec![
            json!(record.frame_index),
            json!(record.predicted.0),
            json!(record.predicted.1),
            json!(truth.0),
            json!(truth.1),
            json!(error),
            json!(record.psr),
        ]);
    }
    report.add_table(per_frame);

    let precision_at = |px: f64| -> f64 {
        summary
            .curve
            .iter()
            .find(|(t, _)| (*t - px).abs() < 1e-9)
            .map(|(_, f)| *f)
            .unwrap_or_else(|| {
                let hits = records
                    .iter()
                    .filter(|r| {
                        let truth = r.truth.expect("annotated");
                        (r.predicted.0 - truth.0).hypot(r.predicted.1 - truth.1) <= px
                    })
                    .count();
                hits as f64 / records.len() as f64
            })
    };
    let mut overview = MetricTable::new(
        "summary",
        &[
            "frames",
            "mean_error_px",
            "precision_at_20px",
            "box_height",
            "box_width",
        ],
    );
    overview.push_row(vec![
        json!(records.len()),
        json!(summary.mean_error),
        json!(precision_at(20.0)),
        json!(box_h),
        json!(box_w),
    ]);
    report.add_table(overview);

    report.set_raw(json!({
        "frames": records
            .iter()
            .map(|r| {
                json!({
                    "frame": r.frame_index,
                    "predicted": [r.predicted.0, r.predicted.1],
                    "truth": r.truth.map(|t| [t.0, t.1]),
                    "psr": r.psr,
                    "seconds": r.seconds,
                })
            })
            .collect::<Vec<_>>(),
    }))?;
    report.record_seconds("init", init_seconds);
    report.record_seconds("steps_total", step_seconds_total);
    report.record_seconds(
        "fps",
        if step_seconds_total > 0.0 {
            (records.len() - 1) as f64 / step_seconds_total
        } else {
            0.0
        },
    );
    Ok(report)
}
