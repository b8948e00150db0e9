//! Localization benchmark: sweep training-set size and window/support ratio
//! on a synthetic suite and measure success rates on held-out images.
//!
//! Each cell trains one constrained filter (support = the template box,
//! window = `ratio` times the box) from windows cut around annotated train
//! centers, then scores every test image: correlate, take the peak, and
//! normalize the center error by the template side. A test image counts as
//! localized at threshold `t` when `error / template_side <= t`.

use std::path::Path;

use corrfilt_core::detect::{correlate, normalized_distance, predicted_center};
use corrfilt_core::signal::{MaskSpec, Signal2D};
use corrfilt_core::solvers::admm::{self, AdmmParams};
use corrfilt_core::solvers::RegularizedProblem;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::errors::{Classify, CliError, Result};
use crate::formats::{list_images, read_annotations, read_image, Annotation};
use crate::harness::{mix_seed, preprocess_window, response_for_center, threshold_grid};
use crate::report::{MetricTable, Report};
use crate::timing::timed;

struct Split {
    images: Vec<Signal2D>,
    annotations: Vec<Annotation>,
}

fn load_split(dir: &Path) -> Result<Split> {
    let paths = list_images(dir)?;
    let annotations = read_annotations(&dir.join("annotations.txt"))?;
    if annotations.len() != paths.len() {
        return Err(CliError::input_at(
            dir,
            format!(
                "{} images but {} annotation rows",
                paths.len(),
                annotations.len()
            ),
        ));
    }
    let images = paths
        .iter()
        .map(|p| read_image(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Split {
        images,
        annotations,
    })
}

#[derive(Clone, Copy, Serialize)]
struct CellKey {
    run: usize,
    train_size: usize,
    ratio: f64,
}

#[derive(Serialize)]
struct CellResult {
    #[serde(flatten)]
    key: CellKey,
    errors: Vec<f64>,
    solver_iterations: usize,
    seconds: f64,
}

fn run_cell(
    key: CellKey,
    cfg: &RunConfig,
    train: &Split,
    test: &Split,
    template_side: usize,
) -> Result<CellResult> {
    let lcfg = &cfg.localize_bench;
    let d = template_side;
    let window = ((key.ratio * d as f64).round() as usize).max(d);
    let mask = if window == d {
        MaskSpec::identity((d, d)).numerical("identity mask")?
    } else {
        MaskSpec::centered((window, window), (d, d)).numerical("centered mask")?
    };
    let taper = Signal2D::cosine_window(window, window).numerical("cosine taper")?;

    // The training subset for this (seed, run) is a seeded shuffle of the
    // train pool; taking prefixes nests subsets across train sizes so cells
    // differ only in what the sweep says they differ in.
    let mut order: Vec<usize> = (0..train.images.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, key.run as u64, 0x10ca112e));
    order.shuffle(&mut rng);
    if key.train_size == 0 || key.train_size > order.len() {
        return Err(CliError::Input(format!(
            "train size {} outside the pool of {} images",
            key.train_size,
            order.len()
        )));
    }

    let mut windows = Vec::with_capacity(key.train_size);
    for &index in order.iter().take(key.train_size) {
        let center = train.annotations[index].center;
        let origin = (
            center.0.round() as isize - (window / 2) as isize,
            center.1.round() as isize - (window / 2) as isize,
        );
        let raw = train.images[index]
            .clamped_window(origin, (window, window))
            .numerical("extracting a training window")?;
        windows.push(preprocess_window(&raw, &taper)?);
    }
    let target = response_for_center(
        (window, window),
        &mask,
        ((window / 2) as f64, (window / 2) as f64),
        lcfg.response_sigma_divisor,
    )?;
    let targets = vec![target; windows.len()];
    let problem = RegularizedProblem::new(windows, targets, mask, lcfg.lambda)
        .numerical("assembling the training problem")?;
    let params = AdmmParams {
        max_iters: lcfg.admm_iters,
        ..AdmmParams::default()
    };
    let ((model, state), seconds) = {
        let (result, seconds) = timed(|| admm::train(&problem, &params));
        (result.numerical("training the filter")?, seconds)
    };

    // Score the whole test split with the filter re-embedded on the image grid.
    let image_shape = test.images[0].shape();
    let view = model
        .with_outer(image_shape)
        .numerical("re-embedding the filter on the image grid")?;
    let mut errors = Vec::with_capacity(test.images.len());
    for (image, annotation) in test.images.iter().zip(&test.annotations) {
        let normalized = image.power_normalize().unwrap_or_else(|_| image.clone());
        let map = correlate(&view, &normalized).numerical("correlating a test image")?;
        let predicted = predicted_center(&view, &map);
        let error = normalized_distance(
            (predicted.0 as f64, predicted.1 as f64),
            annotation.center,
            (0.0, 0.0),
            (0.0, d as f64),
        )
        .numerical("normalizing a localization error")?;
        errors.push(error);
    }
    Ok(CellResult {
        key,
        errors,
        solver_iterations: state.iterations,
        seconds,
    })
}

fn success_rate(errors: &[f64], threshold: f64) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    errors.iter().filter(|e| **e <= threshold).count() as f64 / errors.len() as f64
}

pub fn run(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Report> {
    let lcfg = &cfg.localize_bench;
    let dataset = lcfg
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::Input("localize-bench requires --dataset".into()))?;
    let meta = crate::synth::read_meta(dataset)?;
    let template_side = meta.config.template_size;
    let train = load_split(&dataset.join("train"))?;
    let test = load_split(&dataset.join("test"))?;
    let thresholds = threshold_grid(lcfg.threshold_min, lcfg.threshold_max, lcfg.threshold_step)?;

    let mut keys = Vec::new();
    for run in 0..lcfg.runs.max(1) {
        for &train_size in &lcfg.train_sizes {
            for &ratio in &lcfg.ratios {
                keys.push(CellKey {
                    run,
                    train_size,
                    ratio,
                });
            }
        }
    }
    if keys.is_empty() {
        return Err(CliError::Input(
            "localize-bench sweep is empty (train_sizes or ratios)".into(),
        ));
    }

    let (cells, total_seconds) = timed(|| {
        pool.install(|| {
            keys.par_iter()
                .map(|key| run_cell(*key, cfg, &train, &test, template_side))
                .collect::<Result<Vec<_>>>()
        })
    });
    let cells = cells?;

    // Sequential, ordered reduction: average success over runs per
    // (train_size, ratio) pair at every threshold.
    let mut report = Report::new("localize-bench", cfg.seed, pool.current_num_threads(), lcfg)?;
    let mut curve = MetricTable::new("success_vs_threshold", &[]);
    curve.columns.push("threshold".into());
    let mut pairs = Vec::new();
    for &train_size in &lcfg.train_sizes {
        for &ratio in &lcfg.ratios {
            pairs.push((train_size, ratio));
            curve.columns.push(format!("n{train_size}_r{ratio}"));
        }
    }
    let pair_cells = |train_size: usize, ratio: f64| -> Vec<&CellResult> {
        cells
            .iter()
            .filter(|c| c.key.train_size == train_size && c.key.ratio == ratio)
            .collect()
    };
    for &threshold in &thresholds {
        let mut row = vec![json!(threshold)];
        for &(train_size, ratio) in &pairs {
            let members = pair_cells(train_size, ratio);
            let mean = members
                .iter()
                .map(|c| success_rate(&c.errors, threshold))
                .sum::<f64>()
                / members.len() as f64;
            row.push(json!(mean));
        }
        curve.push_row(row);
    }
    report.add_table(curve);

    let mut summary = MetricTable::new(
        "success_at_threshold",
        &["train_size", "ratio", "threshold", "success"],
    );
    for &(train_size, ratio) in &pairs {
        let members = pair_cells(train_size, ratio);
        let mean = members
            .iter()
            .map(|c| success_rate(&c.errors, lcfg.report_threshold))
            .sum::<f64>()
            / members.len() as f64;
        summary.push_row(vec![
            json!(train_size),
            json!(ratio),
            json!(lcfg.report_threshold),
            json!(mean),
        ]);
    }
    report.add_table(summary);

    report.set_raw(json!({
        "template_side": template_side,
        "image_shape": test.images[0].shape(),
        "thresholds": thresholds,
        "cells": cells,
    }))?;
    report.record_seconds("total", total_seconds);
    Ok(report)
}
