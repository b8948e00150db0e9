//! `train`: fit one filter from a directory of images and persist it.
//!
//! Every image is one training window; the target center defaults to the
//! image center and can be overridden per image with an annotation table.
//! `--solver mosse` uses the closed-form full-window ridge; `--solver cflb`
//! constrains the support to `--filter-height x --filter-width` (or the full
//! window with `--mask-equals-image`) and runs the splitting solver. The
//! model container is written first; the training report lands in the
//! output directory next to it.

use corrfilt_core::signal::{MaskSpec, Signal2D};
use corrfilt_core::solvers::admm::{self, AdmmParams};
use corrfilt_core::solvers::{mosse_train, RegularizedProblem};
use serde_json::json;

use crate::config::{RunConfig, SolverKind};
use crate::errors::{Classify, CliError, Result};
use crate::formats::{list_images, read_annotations, read_image, write_model};
use crate::harness::{preprocess_window, response_for_center};
use crate::report::{MetricTable, Report};
use crate::timing::timed;

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let tcfg = &cfg.train;
    let inputs_dir = tcfg
        .inputs
        .as_ref()
        .ok_or_else(|| CliError::Input("train requires --inputs".into()))?;
    let paths = list_images(inputs_dir)?;
    let images = paths
        .iter()
        .map(|p| read_image(p))
        .collect::<Result<Vec<_>>>()?;
    let shape = images[0].shape();
    if let Some(other) = images.iter().find(|im| im.shape() != shape) {
        return Err(CliError::input_at(
            inputs_dir,
            format!(
                "training images must share one shape: found {:?} and {:?}",
                shape,
                other.shape()
            ),
        ));
    }

    let centers: Vec<(f64, f64)> = match &tcfg.annotations {
        Some(path) => {
            let rows = read_annotations(path)?;
            if rows.len() != images.len() {
                return Err(CliError::input_at(
                    path,
                    format!("{} rows for {} images", rows.len(), images.len()),
                ));
            }
            rows.iter().map(|a| a.center).collect()
        }
        None => images
            .iter()
            .map(|_| ((shape.0 / 2) as f64, (shape.1 / 2) as f64))
            .collect(),
    };

    // Support geometry. mosse always fills the window; cflb defaults to the
    // window unless an explicit support size shrinks it.
    let support = match (tcfg.solver, tcfg.mask_equals_image) {
        (SolverKind::Mosse, _) | (SolverKind::Cflb, true) => shape,
        (SolverKind::Cflb, false) => (
            tcfg.filter_height.unwrap_or(shape.0),
            tcfg.filter_width.unwrap_or(shape.1),
        ),
    };
    if support.0 == 0 || support.1 == 0 || support.0 > shape.0 || support.1 > shape.1 {
        return Err(CliError::Input(format!(
            "filter support {support:?} must fit the {shape:?} image grid"
        )));
    }
    if tcfg.solver == SolverKind::Mosse
        && (tcfg.filter_height.unwrap_or(shape.0) != shape.0
            || tcfg.filter_width.unwrap_or(shape.1) != shape.1)
    {
        return Err(CliError::Input(
            "mosse trains a full-window filter: drop --filter-height/--filter-width \
             or use --solver cflb"
                .into(),
        ));
    }
    let mask = if support == shape {
        MaskSpec::identity(shape).numerical("identity mask")?
    } else {
        MaskSpec::centered(shape, support).numerical("centered mask")?
    };

    let taper = Signal2D::cosine_window(shape.0, shape.1).numerical("cosine taper")?;
    let mut windows = Vec::with_capacity(images.len());
    for image in &images {
        if tcfg.preprocess {
            windows.push(preprocess_window(image, &taper)?);
        } else {
            windows.push(image.clone());
        }
    }
    let targets = centers
        .iter()
        .map(|&c| response_for_center(shape, &mask, c, tcfg.response_sigma_divisor))
        .collect::<Result<Vec<_>>>()?;
    let problem = RegularizedProblem::new(windows, targets, mask, tcfg.lambda)
        .numerical("assembling the training problem")?;

    let exemplars = problem.exemplar_count();
    let mut report = Report::new("train", cfg.seed, 1, tcfg)?;
    let (model, trace, stop, seconds) = match tcfg.solver {
        SolverKind::Mosse => {
            let (res, seconds) = timed(|| mosse_train(&problem));
            let model = res.numerical("closed-form solve")?;
            (model, Vec::new(), "closed-form".to_string(), seconds)
        }
        SolverKind::Cflb => {
            let params = AdmmParams {
                max_iters: tcfg.admm_iters,
                rel_tol: tcfg.rel_tol,
                ..AdmmParams::default()
            };
            let (res, seconds) = timed(|| admm::train(&problem, &params));
            let (model, state) = res.numerical("splitting solve")?;
            (model, state.trace, format!("{:?}", state.stop), seconds)
        }
    };
    let final_objective = problem
        .objective(model.filter())
        .numerical("evaluating the final objective")?;

    let model_path = tcfg
        .model_out
        .clone()
        .unwrap_or_else(|| cfg.out_dir.join("model.cflb"));
    write_model(&model_path, &model)?;

    let mut summary = MetricTable::new(
        "summary",
        &[
            "exemplars",
            "window_h",
            "window_w",
            "filter_h",
            "filter_w",
            "lambda",
            "solver",
            "iterations",
            "stop",
            "final_objective",
        ],
    );
    summary.push_row(vec![
        json!(exemplars),
        json!(shape.0),
        json!(shape.1),
        json!(support.0),
        json!(support.1),
        json!(tcfg.lambda),
        json!(match tcfg.solver {
            SolverKind::Mosse => "mosse",
            SolverKind::Cflb => "cflb",
        }),
        json!(trace.len()),
        json!(stop),
        json!(final_objective),
    ]);
    report.add_table(summary);

    if !trace.is_empty() {
        let mut objective_trace = MetricTable::new(
            "objective_trace",
            &["iteration", "objective", "constraint_gap", "penalty"],
        );
        for (i, record) in trace.iter().enumerate() {
            objective_trace.push_row(vec![
                json!(i + 1),
                json!(record.objective),
                json!(record.primal_residual),
                json!(record.penalty),
            ]);
        }
        report.add_table(objective_trace);
    }

    report.set_raw(json!({
        "model_path": model_path,
        "inputs": paths,
        "centers": centers,
    }))?;
    report.record_seconds("solve", seconds);
    Ok(report)
}
