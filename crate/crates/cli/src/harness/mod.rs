//! Benchmark and training engines behind the subcommands.
//!
//! Each engine is a pure function from configuration to a [`Report`]:
//! deterministic metric tables (given the seed) plus wall-clock timings kept
//! out of the tables. Benchmark cells run on a worker pool; results are
//! collected in declaration order and reduced sequentially, so thread
//! scheduling never leaks into any reported number.

pub mod convergence;
pub mod localize;
pub mod track;
pub mod train;

use corrfilt_core::signal::{MaskSpec, ShiftVec, Signal2D};

use crate::errors::{Classify, Result};

/// The desired-response recipe shared by every trainer in the toolkit: a
/// wrapped Gaussian of width `sqrt(support area) / sigma_divisor` whose peak
/// sits at the circular shift aligning the filter support with a target
/// centered at `center` (window coordinates, rounded to the nearest pixel).
pub fn response_for_center(
    window: (usize, usize),
    mask: &MaskSpec,
    center: (f64, f64),
    sigma_divisor: f64,
) -> Result<Signal2D> {
    let (ih, iw) = mask.inner();
    let (oy, ox) = mask.offset();
    let sigma = ((ih * iw) as f64).sqrt() / sigma_divisor;
    let centered = Signal2D::gaussian_response(
        window.0,
        window.1,
        ((window.0 / 2) as f64, (window.1 / 2) as f64),
        sigma,
    )
    .numerical("building the desired response")?;
    // Peak shift that places the support over the target: top-left of the
    // target patch minus the support offset.
    let anchor_r = center.0.round() as isize - (ih / 2) as isize - oy as isize;
    let anchor_c = center.1.round() as isize - (iw / 2) as isize - ox as isize;
    Ok(centered.circular_shift(ShiftVec::new(
        anchor_r - (window.0 / 2) as isize,
        anchor_c - (window.1 / 2) as isize,
    )))
}

/// Zero-mean/unit-variance normalization plus a cosine taper — the standard
/// conditioning applied to every training window.
pub fn preprocess_window(window: &Signal2D, taper: &Signal2D) -> Result<Signal2D> {
    window
        .power_normalize()
        .and_then(|n| n.hadamard(taper))
        .numerical("preprocessing a training window")
}

/// Inclusive arithmetic grid `min, min+step, …` up to `max` (within a half
/// step of rounding slack). Computed multiplicatively so the same
/// configuration always yields bit-identical thresholds.
pub fn threshold_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || min <= 0.0 {
        return Err(crate::errors::CliError::Input(format!(
            "invalid threshold grid: min {min}, max {max}, step {step}"
        )));
    }
    let count = ((max - min) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

/// Worker pool honoring the `threads` setting (0 = one per core).
pub fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .input("building the worker pool")
}

/// Stable per-cell RNG seeds: mixes the master seed with cell coordinates.
pub fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = master
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use corrfilt_core::detect::predicted_center;
    use corrfilt_core::solvers::FilterModel;
    use corrfilt_core::spectral::SpectralEnergies;

    #[test]
    fn threshold_grids_cover_the_contract_ranges() {
        let localization = threshold_grid(0.01, 0.25, 0.01).unwrap();
        assert_eq!(localization.len(), 25);
        assert!((localization[0] - 0.01).abs() < 1e-12);
        assert!((localization[24] - 0.25).abs() < 1e-12);
        let precision = threshold_grid(1.0, 50.0, 1.0).unwrap();
        assert_eq!(precision.len(), 50);
        assert_eq!(precision[19], 20.0);
        assert!(threshold_grid(0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn response_anchor_matches_the_detector_convention() {
        // Plant a response for a target centered at (r, c); the detector
        // must read the peak back at exactly (r, c).
        for (window, inner, center) in [
            ((16usize, 16usize), (8usize, 8usize), (9.0, 6.0)),
            ((13, 11), (5, 4), (6.0, 5.0)),
            ((12, 12), (12, 12), (4.0, 7.0)),
        ] {
            let mask = if inner == window {
                MaskSpec::identity(window).unwrap()
            } else {
                MaskSpec::centered(window, inner).unwrap()
            };
            let response = response_for_center(window, &mask, center, 16.0).unwrap();
            let map = corrfilt_core::detect::ResponseMap::from_response(response);
            let energies = SpectralEnergies::zeros(window).unwrap();
            let filter =
                Signal2D::from_fn(
                    inner.0,
                    inner.1,
                    |r, c| {
                        if (r, c) == (0, 0) {
                            1.0
                        } else {
                            0.0
                        }
                    },
                )
                .unwrap();
            let model = FilterModel::new(filter, energies, mask, 0.01).unwrap();
            let predicted = predicted_center(&model, &map);
            assert_eq!(
                predicted,
                (center.0 as usize, center.1 as usize),
                "window {window:?} inner {inner:?}"
            );
        }
    }

    #[test]
    fn mixed_seeds_separate_cells() {
        let a = mix_seed(7, 0, 0);
        let b = mix_seed(7, 0, 1);
        let c = mix_seed(7, 1, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, mix_seed(7, 0, 0));
    }
}
