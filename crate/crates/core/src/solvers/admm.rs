//! Operator-splitting solver for restricted-support filters.
//!
//! The objective couples all frequency bins through the support constraint,
//! so neither a per-bin closed form nor a small dense solve applies at
//! realistic sizes. This solver splits the problem into two pieces that are
//! each trivial:
//!
//! * an unconstrained per-bin least-squares fit (the *aux spectrum* `W`),
//!   solved bin-by-bin exactly like the closed-form trainer but with the
//!   running penalty added to the denominator, and
//! * a proximal update of the spatial filter `h`, obtained by pulling the
//!   aux spectrum back to the support (`extract`) and shrinking,
//!
//! with a scaled multiplier `zeta` reconciling the two and a geometrically
//! growing (clamped) penalty tightening the agreement. The consensus
//! variable lives in the frequency domain as `psi(h) = conj(dft2(pad h))`,
//! so a converged aux spectrum correlates like the padded filter itself.
//!
//! Per-iteration cost depends only on the window size — all exemplar data
//! enters through the accumulated [`SpectralEnergies`] — which is what
//! makes the solver usable online: a tracker re-solves with warm-started
//! `h` and `zeta` in a handful of iterations per frame.

use alloc::vec::Vec;

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::signal::{MaskSpec, Signal2D};
use crate::spectral::{dft2, idft2, SpectralEnergies, Spectrum2D};

use super::{FilterModel, RegularizedProblem};

/// Schedule and stopping knobs for [`train`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmParams {
    /// Penalty weight for the first iteration.
    pub initial_penalty: f64,
    /// Multiplicative growth applied to the penalty after every iteration.
    pub penalty_growth: f64,
    /// Ceiling the penalty is clamped to.
    pub max_penalty: f64,
    /// Iteration budget.
    pub max_iters: usize,
    /// Stop once `||W - psi(h)|| / max(||W||, ||psi(h)||)` falls to here.
    pub rel_tol: f64,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self {
            initial_penalty: 1e-2,
            penalty_growth: 1.1,
            max_penalty: 20.0,
            max_iters: 20,
            rel_tol: 1e-3,
        }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        if self.initial_penalty <= 0.0 || !self.initial_penalty.is_finite() {
            return Err(Error::InvalidParameter {
                name: "initial_penalty",
                message: "must be positive and finite",
            });
        }
        if self.penalty_growth < 1.0 || !self.penalty_growth.is_finite() {
            return Err(Error::InvalidParameter {
                name: "penalty_growth",
                message: "must be at least 1 (the schedule never shrinks)",
            });
        }
        if self.max_penalty < self.initial_penalty || !self.max_penalty.is_finite() {
            return Err(Error::InvalidParameter {
                name: "max_penalty",
                message: "must be finite and at least the initial penalty",
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                message: "at least one iteration is required",
            });
        }
        if self.rel_tol < 0.0 || !self.rel_tol.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                message: "must be nonnegative and finite",
            });
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Primal residual fell below `rel_tol`.
    Converged,
    /// Budget exhausted first.
    MaxIters,
}

/// One iteration's worth of diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// Training objective at the iterate (computed from energies).
    pub objective: f64,
    /// `||W - psi(h)|| / max(||W||, ||psi(h)||)` after the iteration.
    pub primal_residual: f64,
    /// Penalty weight the iteration ran with (before growth).
    pub penalty: f64,
    /// Wall-clock duration of the iteration per the supplied clock.
    pub seconds: f64,
}

/// Final iterates plus the per-iteration trace.
#[derive(Debug, Clone)]
pub struct AdmmState {
    /// Per-bin aux spectrum `W` after the last iteration.
    pub aux_spectrum: Spectrum2D,
    /// Spatial filter taps on the support grid.
    pub filter: Signal2D,
    /// Lagrange multiplier `zeta` (frequency domain, window grid).
    pub multiplier: Spectrum2D,
    /// Penalty the *next* iteration would use (post-growth).
    pub penalty: f64,
    /// Iterations actually executed.
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: Vec<TraceRecord>,
}

/// Previous iterates to resume from (the penalty schedule restarts).
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub filter: Signal2D,
    pub multiplier: Spectrum2D,
}

/// `psi(h) = conj(dft2(pad h))` — the frequency-domain image of a support-
/// constrained filter, in the orientation the per-bin fit works in.
pub(super) fn padded_conj_spectrum(mask: &MaskSpec, filter: &Signal2D) -> Result<Spectrum2D> {
    Ok(dft2(&mask.pad(filter)?).conj())
}

/// Adjoint direction of [`padded_conj_spectrum`] (up to the window size
/// factor): pull a window-grid spectrum back to spatial taps on the support.
pub(super) fn extract(mask: &MaskSpec, spectrum: &Spectrum2D) -> Result<Signal2D> {
    mask.crop(&idft2(spectrum)?.reflect())
}

/// Exact minimizer of the per-bin subproblem:
/// `W = (cross + penalty * psi_h - zeta) / (auto + penalty)`.
pub fn spectrum_step(
    energies: &SpectralEnergies,
    padded_filter_spectrum: &Spectrum2D,
    multiplier: &Spectrum2D,
    penalty: f64,
) -> Result<Spectrum2D> {
    let numerator = energies
        .cross()
        .add(&padded_filter_spectrum.scaled(penalty))?
        .sub(multiplier)?;
    numerator.zip_map(energies.auto(), |n, a| n / (a.re + penalty))
}

/// Exact minimizer of the filter subproblem:
/// `h = (penalty * extract(W) + extract(zeta)) / (penalty + lambda)`.
///
/// The denominator is the one consistent with `extract` carrying the
/// inverse-transform normalization; a finite-difference check of the
/// augmented objective pins it down (see the solver tests).
pub fn filter_step(
    aux_spectrum: &Spectrum2D,
    multiplier: &Spectrum2D,
    mask: &MaskSpec,
    penalty: f64,
    lambda: f64,
) -> Result<Signal2D> {
    let from_aux = extract(mask, aux_spectrum)?;
    let from_multiplier = extract(mask, multiplier)?;
    Ok(from_aux
        .scaled(penalty)
        .add(&from_multiplier)?
        .scaled(1.0 / (penalty + lambda)))
}

/// Gradient-ascent step on the multiplier:
/// `zeta <- zeta + penalty * (W - psi_h)`.
pub fn multiplier_step(
    multiplier: &Spectrum2D,
    aux_spectrum: &Spectrum2D,
    padded_filter_spectrum: &Spectrum2D,
    penalty: f64,
) -> Result<Spectrum2D> {
    let gap = aux_spectrum.sub(padded_filter_spectrum)?;
    multiplier.add(&gap.scaled(penalty))
}

/// Geometric growth clamped at the ceiling.
pub fn penalty_step(penalty: f64, params: &AdmmParams) -> f64 {
    (penalty * params.penalty_growth).min(params.max_penalty)
}

/// Training objective evaluated from accumulated energies in `O(T)`:
///
/// ```text
/// E(h) = (response_energy / 2  -  Re sum_k conj(cross) psi_h
///         + 1/2 sum_k auto |psi_h|^2) / T  +  lambda/2 ||h||^2
/// ```
///
/// `response_energy` is `sum_i ||dft2(y_i)||^2` accumulated with the same
/// weighting as the energies. Agrees with the direct spatial evaluation of
/// the objective to rounding error.
pub fn objective_from_energies(
    energies: &SpectralEnergies,
    response_energy: f64,
    padded_filter_spectrum: &Spectrum2D,
    filter: &Signal2D,
    lambda: f64,
) -> Result<f64> {
    if padded_filter_spectrum.shape() != energies.shape() {
        return Err(Error::ShapeMismatch {
            context: "objective_from_energies",
            expected: energies.shape(),
            got: padded_filter_spectrum.shape(),
        });
    }
    let size = (energies.shape().0 * energies.shape().1) as f64;
    let mut cross_term = 0.0;
    let mut quad_term = 0.0;
    for ((c, a), p) in energies
        .cross()
        .coefficients()
        .iter()
        .zip(energies.auto().coefficients())
        .zip(padded_filter_spectrum.coefficients())
    {
        cross_term += (c.conj() * p).re;
        quad_term += a.re * p.norm_sqr();
    }
    Ok(
        (0.5 * response_energy - cross_term + 0.5 * quad_term) / size
            + 0.5 * lambda * filter.norm_sq(),
    )
}

/// Where the largest per-bin curvature should sit, in penalty units, for a
/// restricted-support solve.
///
/// The consensus iteration makes progress on a frequency bin while the
/// penalty is within roughly a decade of that bin's curvature
/// (`auto[k] + lambda`), and the default geometric schedule sweeps the
/// penalty through `[1e-2, ~6e-2]` over a 20-iteration budget. Raw spectral
/// energies scale with exemplar count, window area, and signal power, so
/// their curvatures land orders of magnitude above that band and the sweep
/// passes nothing. Rescaling the whole problem — energies, ridge weight,
/// and multiplier alike — is a pure change of units that leaves the
/// minimizer untouched while placing the curvature band where the schedule
/// actually sweeps. The value is the empirical basin floor: relative
/// objective gaps after a 20-iteration default run bottom out (1e-7 to
/// 1e-9 across window sizes, exemplar counts, and ridge weights) when the
/// largest curvature lands between 0.05 and 0.12.
///
/// Full-support problems are excluded: with nothing cropped the iteration
/// decouples per bin, the raw scale already converges at machine precision
/// in tens of iterations, and shrinking the ridge weight below the penalty
/// floor would instead stall the weakly-determined bins.
const CURVATURE_TARGET: f64 = 0.08;

/// Unit rescale factor for a solve: divide the quadratic through by this
/// before iterating. `1.0` (no-op) for full-support masks and degenerate
/// energies.
fn problem_scale(energies: &SpectralEnergies, mask: &MaskSpec) -> f64 {
    if mask.is_identity() {
        return 1.0;
    }
    let auto_max = energies
        .auto()
        .coefficients()
        .iter()
        .map(|c| c.re)
        .fold(0.0f64, f64::max);
    if auto_max > 0.0 {
        auto_max / CURVATURE_TARGET
    } else {
        1.0
    }
}

/// Runs the splitting iteration directly on accumulated energies.
///
/// This is the online entry point: exemplars never appear, so the cost per
/// iteration is a few transforms and element-wise passes over the window
/// grid regardless of how many exemplars the energies summarize. A warm
/// start resumes from previous iterates (the penalty restarts at
/// `initial_penalty`; the solver's fixed point does not depend on the
/// penalty, so resuming at a converged pair leaves it unchanged).
///
/// Restricted-support solves are internally rescaled (see
/// [`CURVATURE_TARGET`]); the reported trace objectives, the multiplier,
/// and the filter are all in the caller's original units.
pub fn train_with_energies(
    energies: &SpectralEnergies,
    response_energy: f64,
    mask: &MaskSpec,
    lambda: f64,
    params: &AdmmParams,
    warm: Option<&WarmStart>,
    clock: &dyn Clock,
) -> Result<AdmmState> {
    let unit_scale = problem_scale(energies, mask);
    sweep(
        energies,
        response_energy,
        mask,
        lambda,
        params,
        warm,
        clock,
        unit_scale,
    )
}

/// One full run of the splitting iteration with the quadratic divided
/// through by `unit_scale` (see [`CURVATURE_TARGET`]); all returned
/// quantities are in the caller's original units.
#[allow(clippy::too_many_arguments)]
fn sweep(
    energies: &SpectralEnergies,
    response_energy: f64,
    mask: &MaskSpec,
    lambda: f64,
    params: &AdmmParams,
    warm: Option<&WarmStart>,
    clock: &dyn Clock,
    unit_scale: f64,
) -> Result<AdmmState> {
    params.validate()?;
    if energies.shape() != mask.outer() {
        return Err(Error::ShapeMismatch {
            context: "train_with_energies",
            expected: mask.outer(),
            got: energies.shape(),
        });
    }
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            message: "ridge weight must be positive and finite",
        });
    }
    if response_energy < 0.0 || !response_energy.is_finite() {
        return Err(Error::InvalidParameter {
            name: "response_energy",
            message: "must be nonnegative and finite",
        });
    }
    let (ih, iw) = mask.inner();
    let (oh, ow) = mask.outer();
    let recip = 1.0 / unit_scale;
    let scaled_energies;
    let working_energies = if unit_scale == 1.0 {
        energies
    } else {
        scaled_energies = energies.scaled(recip);
        &scaled_energies
    };
    let working_lambda = lambda * recip;
    let working_response = response_energy * recip;
    let mut filter = match warm {
        Some(w) => {
            if w.filter.shape() != mask.inner() {
                return Err(Error::ShapeMismatch {
                    context: "warm start filter",
                    expected: mask.inner(),
                    got: w.filter.shape(),
                });
            }
            if w.multiplier.shape() != mask.outer() {
                return Err(Error::ShapeMismatch {
                    context: "warm start multiplier",
                    expected: mask.outer(),
                    got: w.multiplier.shape(),
                });
            }
            w.filter.clone()
        }
        None => Signal2D::zeros(ih, iw)?,
    };
    let mut multiplier = match warm {
        Some(w) => w.multiplier.scaled(recip),
        None => Spectrum2D::zeros(oh, ow)?,
    };
    let mut penalty = params.initial_penalty;
    let mut psi = padded_conj_spectrum(mask, &filter)?;
    let mut aux = Spectrum2D::zeros(oh, ow)?;
    let mut trace = Vec::with_capacity(params.max_iters);
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0;
    for _ in 0..params.max_iters {
        let started = clock.now_seconds();
        aux = spectrum_step(working_energies, &psi, &multiplier, penalty)?;
        filter = filter_step(&aux, &multiplier, mask, penalty, working_lambda)?;
        psi = padded_conj_spectrum(mask, &filter)?;
        multiplier = multiplier_step(&multiplier, &aux, &psi, penalty)?;
        let gap = aux.sub(&psi)?.norm_sq();
        let magnitude = aux.norm_sq().max(psi.norm_sq());
        let primal_residual = if magnitude > 0.0 {
            libm::sqrt(gap / magnitude)
        } else {
            0.0
        };
        let objective = unit_scale
            * objective_from_energies(
                working_energies,
                working_response,
                &psi,
                &filter,
                working_lambda,
            )?;
        let used_penalty = penalty;
        penalty = penalty_step(penalty, params);
        iterations += 1;
        trace.push(TraceRecord {
            objective,
            primal_residual,
            penalty: used_penalty,
            seconds: clock.now_seconds() - started,
        });
        if primal_residual <= params.rel_tol {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(AdmmState {
        aux_spectrum: aux,
        filter,
        multiplier: multiplier.scaled(unit_scale),
        penalty,
        iterations,
        stop,
        trace,
    })
}

/// The stationary Lagrange multiplier for a given filter:
/// `zeta = cross - auto ∘ psi(h)`.
///
/// When `filter` is the exact minimizer, resuming the splitting iteration
/// from `(filter, stationary_multiplier(filter))` is a fixed point: both
/// subproblems reproduce their inputs for any penalty. Use this to warm
/// the online path from a filter obtained by another solver.
pub fn stationary_multiplier(
    energies: &SpectralEnergies,
    mask: &MaskSpec,
    filter: &Signal2D,
) -> Result<Spectrum2D> {
    let psi = padded_conj_spectrum(mask, filter)?;
    energies.cross().sub(&energies.auto().hadamard(&psi)?)
}

/// Batch training: accumulate energies from the problem's exemplars, run
/// the splitting iteration cold, and package the result.
pub fn train(
    problem: &RegularizedProblem,
    params: &AdmmParams,
) -> Result<(FilterModel, AdmmState)> {
    let energies = problem.energies()?;
    let state = train_with_energies(
        &energies,
        problem.response_energy(),
        problem.mask(),
        problem.lambda(),
        params,
        None,
        &crate::clock::NullClock,
    )?;
    let model = FilterModel::new(
        state.filter.clone(),
        energies,
        *problem.mask(),
        problem.lambda(),
    )?;
    Ok((model, state))
}
