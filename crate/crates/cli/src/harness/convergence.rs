//! Convergence benchmark: solver cost and accuracy as the exemplar count
//! grows.
//!
//! For every `n` in the sweep the engine builds seeded synthetic training
//! sets, accumulates their energy statistics (timed: this is the only part
//! whose cost grows with `n`), runs the splitting solver on the energies
//! (timed per iteration: this part must not grow with `n`), and runs the
//! fixed-step gradient-descent baseline whose per-iteration cost is linear
//! in `n`. Accuracy columns compare objective values against the exact
//! minimizer from the matrix-free conjugate-gradient solver.

use corrfilt_core::signal::{MaskSpec, Signal2D};
use corrfilt_core::solvers::admm::{self, AdmmParams};
use corrfilt_core::solvers::{gradient_descent_train, normal, RegularizedProblem};
use corrfilt_core::Error as CoreError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::errors::{Classify, CliError, Result};
use crate::harness::{mix_seed, preprocess_window, response_for_center};
use crate::report::{MetricTable, Report};
use crate::timing::{timed, WallClock};

#[derive(Serialize)]
struct InstanceResult {
    n: usize,
    instance: usize,
    precompute_seconds: f64,
    admm_seconds_per_iteration: f64,
    admm_iterations: usize,
    admm_iters_to_tol: Option<usize>,
    admm_objective_gap: f64,
    admm_trace_objectives: Vec<f64>,
    exact_objective: f64,
    gd_iters_to_tol: Option<usize>,
    gd_objective_gap: Option<f64>,
    gd_diverged: bool,
    gd_trace_objectives: Vec<f64>,
}

/// First 1-based iteration whose objective is within `rel_tol` (relative)
/// of `exact`; traces are objective-after-iteration sequences.
fn iters_to_tolerance(objectives: &[f64], exact: f64, rel_tol: f64) -> Option<usize> {
    let scale = exact.abs().max(f64::MIN_POSITIVE);
    objectives
        .iter()
        .position(|o| ((o - exact) / scale).abs() <= rel_tol)
        .map(|i| i + 1)
}

fn run_instance(n: usize, instance: usize, cfg: &RunConfig) -> Result<InstanceResult> {
    let ccfg = &cfg.convergence_bench;
    let t = ccfg.window;
    let d = ccfg.filter;
    if d > t || d == 0 {
        return Err(CliError::Input(format!(
            "filter side {d} must be in 1..=window side {t}"
        )));
    }
    let mask = if d == t {
        MaskSpec::identity((t, t)).numerical("identity mask")?
    } else {
        MaskSpec::centered((t, t), (d, d)).numerical("centered mask")?
    };
    let taper = Signal2D::cosine_window(t, t).numerical("cosine taper")?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, n as u64, instance as u64));

    // White-noise exemplars: flat expected spectrum, so the iteration-count
    // columns measure the solver rather than an adversarial spectral decay.
    let mut windows = Vec::with_capacity(n);
    for _ in 0..n {
        let raw = Signal2D::from_fn(t, t, |_, _| rng.gen_range(-1.0..1.0))
            .numerical("sampling a noise window")?;
        windows.push(preprocess_window(&raw, &taper)?);
    }
    let target = response_for_center((t, t), &mask, ((t / 2) as f64, (t / 2) as f64), 16.0)?;
    let targets = vec![target; windows.len()];
    let problem = RegularizedProblem::new(windows, targets, mask, ccfg.lambda)
        .numerical("assembling the training problem")?;

    // Precompute: the only n-dependent cost on the energy path.
    let (energies, precompute_seconds) = {
        let (res, secs) = timed(|| problem.energies());
        (res.numerical("accumulating energies")?, secs)
    };
    let response_energy = problem.response_energy();

    // Exact reference once per instance.
    let exact = normal::solve(&energies, &mask, ccfg.lambda, 1e-12, 100_000)
        .numerical("exact reference solve")?;
    let exact_objective = problem
        .objective(&exact.filter)
        .numerical("evaluating the exact objective")?;

    // Splitting solver on energies: per-iteration cost independent of n.
    let params = AdmmParams {
        max_iters: ccfg.max_iters,
        rel_tol: 0.0, // run the full budget so per-iteration timing is comparable
        ..AdmmParams::default()
    };
    let clock = WallClock::start();
    let (state, admm_seconds) = {
        let (res, secs) = timed(|| {
            admm::train_with_energies(
                &energies,
                response_energy,
                &mask,
                ccfg.lambda,
                &params,
                None,
                &clock,
            )
        });
        (res.numerical("splitting solve")?, secs)
    };
    let admm_trace: Vec<f64> = state.trace.iter().map(|r| r.objective).collect();
    let admm_gap = (admm_trace.last().copied().unwrap_or(f64::INFINITY) - exact_objective)
        / exact_objective.abs().max(f64::MIN_POSITIVE);

    // Gradient-descent baseline: per-iteration cost linear in n. Divergence
    // is recorded, not fatal.
    let gd = gradient_descent_train(&problem, None, ccfg.gd_iters);
    let (gd_trace, gd_diverged) = match gd {
        Ok((_, objectives)) => (objectives, false),
        Err(CoreError::Diverged { objectives }) => (objectives, true),
        Err(other) => return Err(CliError::Numerical(format!("gradient descent: {other}"))),
    };
    let gd_gap = gd_trace
        .last()
        .map(|o| (o - exact_objective) / exact_objective.abs().max(f64::MIN_POSITIVE));

    Ok(InstanceResult {
        n,
        instance,
        precompute_seconds,
        admm_seconds_per_iteration: admm_seconds / state.iterations.max(1) as f64,
        admm_iterations: state.iterations,
        admm_iters_to_tol: iters_to_tolerance(&admm_trace, exact_objective, ccfg.rel_tol),
        admm_objective_gap: admm_gap,
        admm_trace_objectives: admm_trace,
        exact_objective,
        gd_iters_to_tol: iters_to_tolerance(&gd_trace[1..], exact_objective, ccfg.rel_tol),
        gd_objective_gap: gd_gap,
        gd_diverged,
        gd_trace_objectives: gd_trace,
    })
}

pub fn run(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Report> {
    let ccfg = &cfg.convergence_bench;
    if ccfg.n_sweep.is_empty() {
        return Err(CliError::Input("convergence-bench n_sweep is empty".into()));
    }
    let mut keys = Vec::new();
    for &n in &ccfg.n_sweep {
        for instance in 0..ccfg.instances.max(1) {
            keys.push((n, instance));
        }
    }
    let (cells, total_seconds) = timed(|| {
        pool.install(|| {
            keys.par_iter()
                .map(|&(n, instance)| run_instance(n, instance, cfg))
                .collect::<Result<Vec<_>>>()
        })
    });
    let cells = cells?;

    let mut report = Report::new(
        "convergence-bench",
        cfg.seed,
        pool.current_num_threads(),
        ccfg,
    )?;
    let mut table = MetricTable::new(
        "convergence_vs_n",
        &[
            "n",
            "precompute_seconds",
            "admm_seconds_per_iteration",
            "admm_iterations",
            "admm_iters_to_tol",
            "admm_objective_gap",
            "gd_iters_to_tol",
            "gd_objective_gap",
            "gd_diverged_fraction",
        ],
    );
    for &n in &ccfg.n_sweep {
        let members: Vec<&InstanceResult> = cells.iter().filter(|c| c.n == n).collect();
        let count = members.len() as f64;
        let mean = |f: &dyn Fn(&InstanceResult) -> f64| -> f64 {
            members.iter().map(|m| f(m)).sum::<f64>() / count
        };
        let mean_opt = |f: &dyn Fn(&InstanceResult) -> Option<usize>| -> Value {
            let hits: Vec<f64> = members
                .iter()
                .filter_map(|m| f(m).map(|v| v as f64))
                .collect();
            if hits.len() == members.len() {
                json!(hits.iter().sum::<f64>() / count)
            } else {
                Value::Null
            }
        };
        table.push_row(vec![
            json!(n),
            json!(mean(&|m| m.precompute_seconds)),
            json!(mean(&|m| m.admm_seconds_per_iteration)),
            json!(mean(&|m| m.admm_iterations as f64)),
            mean_opt(&|m| m.admm_iters_to_tol),
            json!(mean(&|m| m.admm_objective_gap)),
            mean_opt(&|m| m.gd_iters_to_tol),
            match members.iter().all(|m| m.gd_objective_gap.is_some()) {
                true => json!(mean(&|m| m.gd_objective_gap.unwrap_or(f64::NAN))),
                false => Value::Null,
            },
            json!(mean(&|m| if m.gd_diverged { 1.0 } else { 0.0 })),
        ]);
    }
    report.add_table(table);
    report.set_raw(json!({ "instances": cells }))?;
    report.record_seconds("total", total_seconds);
    Ok(report)
}
