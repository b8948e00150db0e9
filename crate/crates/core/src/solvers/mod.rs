//! Filter training.
//!
//! Five routes to (approximately) the same place, with very different costs:
//!
//! * [`mosse_train`] — the classical closed-form per-bin solver. Exact, but
//!   only defined when the filter support is the whole window.
//! * [`masked_spatial_oracle`] / [`spatial_ridge_oracle`] — direct dense
//!   normal-equation solves over every circular shift. Exact for any
//!   support, deliberately naive (no transforms), and guarded to small
//!   filter sizes; these are the reference the fast solvers are tested
//!   against.
//! * [`normal`] — the same normal equations solved matrix-free by conjugate
//!   gradients through the window-grid transforms: exact at any size, priced
//!   for one-off solves.
//! * [`gradient_descent_train`] — plain first-order descent whose
//!   per-iteration cost re-touches every exemplar.
//! * [`admm`] — the operator-splitting solver that keeps per-iteration cost
//!   independent of the number of exemplars.
//!
//! The trained objective throughout is
//!
//! ```text
//! E(h) = 1/2 sum_i ||y_i - corr(x_i, pad h)||^2 + lambda/2 ||h||^2
//! ```
//!
//! where `corr(x, g)(r) = sum_u g(u) x(u + r)` is circular cross-correlation
//! on the window grid and `pad` embeds the small filter into the window at
//! the mask offset.

pub mod admm;
mod linalg;
pub mod normal;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::signal::{MaskSpec, Signal2D};
use crate::spectral::{dft2, idft2, SpectralEnergies, Spectrum2D};

/// Largest filter sample count the dense reference solvers will accept.
const ORACLE_SUPPORT_LIMIT: usize = 4096;

/// A training instance: paired window-shaped inputs and target responses,
/// the filter support placement, and the ridge weight.
#[derive(Debug, Clone)]
pub struct RegularizedProblem {
    inputs: Vec<Signal2D>,
    targets: Vec<Signal2D>,
    mask: MaskSpec,
    lambda: f64,
}

impl RegularizedProblem {
    pub fn new(
        inputs: Vec<Signal2D>,
        targets: Vec<Signal2D>,
        mask: MaskSpec,
        lambda: f64,
    ) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyInput {
                context: "RegularizedProblem inputs",
            });
        }
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch {
                context: "RegularizedProblem",
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        for s in inputs.iter().chain(targets.iter()) {
            if s.shape() != mask.outer() {
                return Err(Error::ShapeMismatch {
                    context: "RegularizedProblem exemplar",
                    expected: mask.outer(),
                    got: s.shape(),
                });
            }
        }
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                message: "ridge weight must be positive and finite",
            });
        }
        Ok(Self {
            inputs,
            targets,
            mask,
            lambda,
        })
    }

    pub fn inputs(&self) -> &[Signal2D] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Signal2D] {
        &self.targets
    }

    pub fn mask(&self) -> &MaskSpec {
        &self.mask
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn exemplar_count(&self) -> usize {
        self.inputs.len()
    }

    /// Per-bin energy sums over all exemplars.
    pub fn energies(&self) -> Result<SpectralEnergies> {
        SpectralEnergies::accumulate(&self.inputs, &self.targets)
    }

    /// `sum_i ||dft2(y_i)||^2` — the constant term of the objective when it
    /// is evaluated from energies instead of raw exemplars.
    pub fn response_energy(&self) -> f64 {
        let size = self.mask.outer_len() as f64;
        size * self.targets.iter().map(Signal2D::norm_sq).sum::<f64>()
    }

    /// Evaluates the training objective at a candidate filter by running
    /// the actual correlations — no energy shortcuts, so this is also the
    /// arbiter when solvers disagree.
    pub fn objective(&self, filter: &Signal2D) -> Result<f64> {
        if filter.shape() != self.mask.inner() {
            return Err(Error::ShapeMismatch {
                context: "objective filter",
                expected: self.mask.inner(),
                got: filter.shape(),
            });
        }
        let padded = dft2(&self.mask.pad(filter)?);
        let mut data_term = 0.0;
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            let response = idft2(&dft2(x).hadamard(&padded.conj())?)?;
            data_term += y.sub(&response)?.norm_sq();
        }
        Ok(0.5 * data_term + 0.5 * self.lambda * filter.norm_sq())
    }
}

/// A trained filter bundled with everything needed to correlate, adapt
/// online, and serialize: the spatial taps, their padded spectrum, the
/// energy statistics they were solved from, and the support placement.
#[derive(Debug, Clone)]
pub struct FilterModel {
    filter: Signal2D,
    padded_spectrum: Spectrum2D,
    energies: SpectralEnergies,
    mask: MaskSpec,
    lambda: f64,
}

impl FilterModel {
    pub fn new(
        filter: Signal2D,
        energies: SpectralEnergies,
        mask: MaskSpec,
        lambda: f64,
    ) -> Result<Self> {
        if filter.shape() != mask.inner() {
            return Err(Error::ShapeMismatch {
                context: "FilterModel filter",
                expected: mask.inner(),
                got: filter.shape(),
            });
        }
        if energies.shape() != mask.outer() {
            return Err(Error::ShapeMismatch {
                context: "FilterModel energies",
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
        let padded_spectrum = dft2(&mask.pad(&filter)?);
        Ok(Self {
            filter,
            padded_spectrum,
            energies,
            mask,
            lambda,
        })
    }

    pub fn filter(&self) -> &Signal2D {
        &self.filter
    }

    /// `dft2(pad(filter))` on the window grid.
    pub fn padded_spectrum(&self) -> &Spectrum2D {
        &self.padded_spectrum
    }

    pub fn energies(&self) -> &SpectralEnergies {
        &self.energies
    }

    pub fn mask(&self) -> &MaskSpec {
        &self.mask
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Re-embeds the filter on a (usually larger) grid with the support at
    /// the grid origin, for correlating against images whose size differs
    /// from the training window. The returned model carries empty energy
    /// statistics: it is a deployment view, not a trainable state.
    pub fn with_outer(&self, outer: (usize, usize)) -> Result<Self> {
        let mask = MaskSpec::new(outer, self.mask.inner(), (0, 0))?;
        let energies = SpectralEnergies::zeros(outer)?;
        Self::new(self.filter.clone(), energies, mask, self.lambda)
    }
}

/// Per-bin closed-form filter from accumulated energies:
/// `W = cross / (auto + lambda)`, spatial taps `idft2(conj(W))`.
pub fn mosse_filter(energies: &SpectralEnergies, lambda: f64) -> Result<Signal2D> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            message: "ridge weight must be positive and finite",
        });
    }
    let w = energies
        .cross()
        .zip_map(energies.auto(), |c, a| c / (a.re + lambda))?;
    idft2(&w.conj())
}

/// Closed-form training. Exact, but only when the filter support covers the
/// whole window (identity mask); constrained supports need [`admm`] or the
/// dense oracles.
pub fn mosse_train(problem: &RegularizedProblem) -> Result<FilterModel> {
    if !problem.mask().is_identity() {
        return Err(Error::InvalidParameter {
            name: "mask",
            message: "closed-form training requires the filter support to cover the window",
        });
    }
    let energies = problem.energies()?;
    let filter = mosse_filter(&energies, problem.lambda())?;
    FilterModel::new(filter, energies, *problem.mask(), problem.lambda())
}

/// Exact minimizer of the training objective by dense normal equations,
/// for any support placement.
///
/// Builds `(lambda I + sum_i sum_r z_{i,r} z_{i,r}^T) h = sum_i sum_r
/// y_i(r) z_{i,r}` where `z_{i,r}` collects the input samples under the
/// (circularly shifted) filter support, and solves by Cholesky. Runs in
/// `O(N T D^2)` time and `O(D^2)` memory, so the support is guarded to at
/// most 4096 taps. Accepts `lambda = 0` (the closed-form and splitting
/// solvers do not); a singular system is then reported as an error.
pub fn masked_spatial_oracle(
    inputs: &[Signal2D],
    targets: &[Signal2D],
    mask: &MaskSpec,
    lambda: f64,
) -> Result<Signal2D> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput {
            context: "masked_spatial_oracle",
        });
    }
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch {
            context: "masked_spatial_oracle",
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            message: "ridge weight must be nonnegative and finite",
        });
    }
    let d = mask.inner_len();
    if d > ORACLE_SUPPORT_LIMIT {
        return Err(Error::SizeGuard {
            context: "masked_spatial_oracle support",
            limit: ORACLE_SUPPORT_LIMIT,
            got: d,
        });
    }
    let (th, tw) = mask.outer();
    let (dh, dw) = mask.inner();
    let (oy, ox) = mask.offset();
    let mut gram = vec![0.0; d * d];
    for i in 0..d {
        gram[i * d + i] = lambda;
    }
    let mut rhs = vec![0.0; d];
    let mut z = vec![0.0; d];
    for (x, y) in inputs.iter().zip(targets) {
        if x.shape() != mask.outer() || y.shape() != mask.outer() {
            return Err(Error::ShapeMismatch {
                context: "masked_spatial_oracle exemplar",
                expected: mask.outer(),
                got: if x.shape() != mask.outer() {
                    x.shape()
                } else {
                    y.shape()
                },
            });
        }
        for r_row in 0..th {
            for r_col in 0..tw {
                let mut k = 0;
                for ti in 0..dh {
                    let row = (oy + ti + r_row) % th;
                    for tj in 0..dw {
                        let col = (ox + tj + r_col) % tw;
                        z[k] = x.get(row, col);
                        k += 1;
                    }
                }
                let target = y.get(r_row, r_col);
                for p in 0..d {
                    let zp = z[p];
                    rhs[p] += target * zp;
                    // Lower triangle only; the solver never reads above it.
                    let row = &mut gram[p * d..p * d + p + 1];
                    for (q, slot) in row.iter_mut().enumerate() {
                        *slot += zp * z[q];
                    }
                }
            }
        }
    }
    let taps = linalg::solve_spd(&gram, &rhs)?;
    Signal2D::new(dh, dw, taps)
}

/// [`masked_spatial_oracle`] with the support covering the whole window —
/// the reference the closed-form solver is checked against.
pub fn spatial_ridge_oracle(
    inputs: &[Signal2D],
    targets: &[Signal2D],
    lambda: f64,
) -> Result<Signal2D> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput {
            context: "spatial_ridge_oracle",
        });
    }
    let mask = MaskSpec::identity(inputs[0].shape())?;
    masked_spatial_oracle(inputs, targets, &mask, lambda)
}

/// First-order baseline: fixed-step gradient descent from a zero filter.
///
/// Every iteration recomputes each exemplar's response and residual, so the
/// per-iteration cost grows linearly with the exemplar count — this solver
/// exists to make that scaling observable next to the energy-based ones.
/// With `step = None` the step is `1 / (lambda + max_k auto[k])`, a bound on
/// the objective's curvature that cannot diverge. Returns the filter and
/// the objective value before every iteration and after the last (length
/// `iterations + 1`). If the objective grows past ten times its initial
/// value the run aborts with the trace attached.
pub fn gradient_descent_train(
    problem: &RegularizedProblem,
    step: Option<f64>,
    iterations: usize,
) -> Result<(Signal2D, Vec<f64>)> {
    let mask = *problem.mask();
    let (ih, iw) = mask.inner();
    let input_spectra: Vec<Spectrum2D> = problem.inputs().iter().map(dft2).collect();
    let step = match step {
        Some(s) => {
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "step",
                    message: "step size must be positive and finite",
                });
            }
            s
        }
        None => {
            let mut max_auto = 0.0f64;
            let bins = mask.outer_len();
            for k in 0..bins {
                let total: f64 = input_spectra
                    .iter()
                    .map(|s| s.coefficients()[k].norm_sqr())
                    .sum();
                max_auto = max_auto.max(total);
            }
            1.0 / (problem.lambda() + max_auto)
        }
    };
    let mut filter = Signal2D::zeros(ih, iw)?;
    let mut objectives = vec![problem.objective(&filter)?];
    let guard = 10.0 * objectives[0];
    for _ in 0..iterations {
        let padded = dft2(&mask.pad(&filter)?).conj();
        let mut acc = Spectrum2D::zeros(mask.outer().0, mask.outer().1)?;
        for (xs, y) in input_spectra.iter().zip(problem.targets()) {
            let response = idft2(&xs.hadamard(&padded)?)?;
            let residual_spectrum = dft2(&response.sub(y)?);
            acc = acc.add(&xs.hadamard(&residual_spectrum.conj())?)?;
        }
        let data_grad = mask.crop(&idft2(&acc)?)?;
        let grad = filter.scaled(problem.lambda()).add(&data_grad)?;
        filter = filter.sub(&grad.scaled(step))?;
        let objective = problem.objective(&filter)?;
        objectives.push(objective);
        if objective > guard {
            return Err(Error::Diverged { objectives });
        }
    }
    Ok((filter, objectives))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    fn random_signal(h: usize, w: usize, next: &mut impl FnMut() -> f64) -> Signal2D {
        Signal2D::from_fn(h, w, |_, _| next()).unwrap()
    }

    #[test]
    fn problem_construction_validates() {
        let mask = MaskSpec::identity((2, 2)).unwrap();
        let x = Signal2D::zeros(2, 2).unwrap();
        assert!(RegularizedProblem::new(vec![], vec![], mask, 0.1).is_err());
        assert!(RegularizedProblem::new(vec![x.clone()], vec![], mask, 0.1).is_err());
        assert!(RegularizedProblem::new(vec![x.clone()], vec![x.clone()], mask, 0.0).is_err());
        let wrong = Signal2D::zeros(3, 2).unwrap();
        assert!(RegularizedProblem::new(vec![wrong], vec![x.clone()], mask, 0.1).is_err());
        assert!(RegularizedProblem::new(vec![x.clone()], vec![x], mask, 0.1).is_ok());
    }

    #[test]
    fn single_pixel_closed_form() {
        // One 1x1 exemplar: the minimizer of (y - x h)^2 / 2 + lambda h^2 / 2
        // is h = x y / (x^2 + lambda).
        let (x0, y0, lambda) = (3.0, 2.0, 0.5);
        let x = Signal2D::new(1, 1, vec![x0]).unwrap();
        let y = Signal2D::new(1, 1, vec![y0]).unwrap();
        let problem = RegularizedProblem::new(
            vec![x.clone()],
            vec![y.clone()],
            MaskSpec::identity((1, 1)).unwrap(),
            lambda,
        )
        .unwrap();
        let model = mosse_train(&problem).unwrap();
        let expected = x0 * y0 / (x0 * x0 + lambda);
        assert!((model.filter().get(0, 0) - expected).abs() < 1e-12);
        let oracle = spatial_ridge_oracle(&[x], &[y], lambda).unwrap();
        assert!((oracle.get(0, 0) - expected).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_dense_oracle_on_full_support() {
        let mut next = lcg(42);
        let (h, w) = (3, 4);
        let inputs: Vec<_> = (0..2).map(|_| random_signal(h, w, &mut next)).collect();
        let targets: Vec<_> = (0..2).map(|_| random_signal(h, w, &mut next)).collect();
        let lambda = 0.05;
        let problem = RegularizedProblem::new(
            inputs.clone(),
            targets.clone(),
            MaskSpec::identity((h, w)).unwrap(),
            lambda,
        )
        .unwrap();
        let fast = mosse_train(&problem).unwrap();
        let exact = spatial_ridge_oracle(&inputs, &targets, lambda).unwrap();
        for (a, b) in fast.filter().samples().iter().zip(exact.samples()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        // And the fast solve really is the objective minimizer.
        let at_fast = problem.objective(fast.filter()).unwrap();
        let at_zero = problem.objective(&Signal2D::zeros(h, w).unwrap()).unwrap();
        assert!(at_fast < at_zero);
    }

    #[test]
    fn closed_form_rejects_restricted_supports() {
        let mask = MaskSpec::centered((4, 4), (2, 2)).unwrap();
        let x = Signal2D::zeros(4, 4).unwrap();
        let problem = RegularizedProblem::new(vec![x.clone()], vec![x], mask, 0.1).unwrap();
        assert!(mosse_train(&problem).is_err());
    }

    #[test]
    fn masked_oracle_is_stationary_for_the_objective() {
        let mut next = lcg(7);
        let mask = MaskSpec::new((5, 4), (2, 3), (1, 0)).unwrap();
        let inputs: Vec<_> = (0..2).map(|_| random_signal(5, 4, &mut next)).collect();
        let targets: Vec<_> = (0..2).map(|_| random_signal(5, 4, &mut next)).collect();
        let lambda = 0.2;
        let oracle = masked_spatial_oracle(&inputs, &targets, &mask, lambda).unwrap();
        let problem = RegularizedProblem::new(inputs, targets, mask, lambda).unwrap();
        let base = problem.objective(&oracle).unwrap();
        // Central finite differences of the objective vanish at the solution.
        let eps = 1e-5;
        for idx in 0..oracle.len() {
            let bump = |delta: f64| {
                let perturbed = Signal2D::from_fn(2, 3, |i, j| {
                    let v = oracle.get(i, j);
                    if i * 3 + j == idx {
                        v + delta
                    } else {
                        v
                    }
                })
                .unwrap();
                problem.objective(&perturbed).unwrap()
            };
            let derivative = (bump(eps) - bump(-eps)) / (2.0 * eps);
            assert!(
                derivative.abs() < 1e-6,
                "tap {idx}: derivative {derivative}"
            );
            assert!(bump(eps) >= base && bump(-eps) >= base);
        }
    }

    #[test]
    fn oracle_guards_support_size() {
        let mask = MaskSpec::identity((65, 65)).unwrap();
        let x = Signal2D::zeros(65, 65).unwrap();
        assert!(matches!(
            masked_spatial_oracle(
                core::slice::from_ref(&x),
                core::slice::from_ref(&x),
                &mask,
                0.1
            ),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn gradient_descent_approaches_the_oracle() {
        let mut next = lcg(11);
        let mask = MaskSpec::centered((4, 4), (2, 2)).unwrap();
        let inputs: Vec<_> = (0..3).map(|_| random_signal(4, 4, &mut next)).collect();
        let targets: Vec<_> = (0..3).map(|_| random_signal(4, 4, &mut next)).collect();
        let lambda = 0.5;
        let oracle = masked_spatial_oracle(&inputs, &targets, &mask, lambda).unwrap();
        let problem = RegularizedProblem::new(inputs, targets, mask, lambda).unwrap();
        let (filter, trace) = gradient_descent_train(&problem, None, 400).unwrap();
        // Monotone decrease with the default (curvature-bounded) step.
        for pair in trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
        let gap = problem.objective(&filter).unwrap() - problem.objective(&oracle).unwrap();
        assert!(gap.abs() < 1e-6, "objective gap {gap}");
    }

    #[test]
    fn gradient_descent_reports_divergence() {
        let mut next = lcg(13);
        let mask = MaskSpec::identity((3, 3)).unwrap();
        let inputs = vec![random_signal(3, 3, &mut next)];
        let targets = vec![random_signal(3, 3, &mut next)];
        let problem = RegularizedProblem::new(inputs, targets, mask, 0.1).unwrap();
        match gradient_descent_train(&problem, Some(100.0), 50) {
            Err(Error::Diverged { objectives }) => assert!(objectives.len() >= 2),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn energy_form_of_the_objective_matches_direct_evaluation() {
        let mut next = lcg(19);
        let mask = MaskSpec::new((4, 5), (2, 2), (1, 2)).unwrap();
        let inputs: Vec<_> = (0..3).map(|_| random_signal(4, 5, &mut next)).collect();
        let targets: Vec<_> = (0..3).map(|_| random_signal(4, 5, &mut next)).collect();
        let problem = RegularizedProblem::new(inputs, targets, mask, 0.3).unwrap();
        let filter = random_signal(2, 2, &mut next);
        let direct = problem.objective(&filter).unwrap();
        let energies = problem.energies().unwrap();
        let padded = dft2(&mask.pad(&filter).unwrap()).conj();
        let via_energies = admm::objective_from_energies(
            &energies,
            problem.response_energy(),
            &padded,
            &filter,
            problem.lambda(),
        )
        .unwrap();
        assert!(
            (direct - via_energies).abs() < 1e-9 * direct.abs().max(1.0),
            "{direct} vs {via_energies}"
        );
    }
}
