//! Applying a trained filter to an image: response maps, peak scoring, and
//! normalized localization error.

use crate::error::{Error, Result};
use crate::signal::Signal2D;
use crate::solvers::FilterModel;
use crate::spectral::{dft2, idft2};

/// A correlation response over every circular placement of the filter,
/// with its (first, row-major) strict maximum located.
#[derive(Debug, Clone)]
pub struct ResponseMap {
    response: Signal2D,
    peak: (usize, usize),
    peak_value: f64,
}

impl ResponseMap {
    pub fn from_response(response: Signal2D) -> Self {
        let mut peak = (0, 0);
        let mut best = response.get(0, 0);
        for i in 0..response.height() {
            for j in 0..response.width() {
                let v = response.get(i, j);
                if v > best {
                    best = v;
                    peak = (i, j);
                }
            }
        }
        Self {
            response,
            peak,
            peak_value: best,
        }
    }

    pub fn response(&self) -> &Signal2D {
        &self.response
    }

    /// Row/column of the maximum response (ties resolve to the first in
    /// row-major order).
    pub fn peak(&self) -> (usize, usize) {
        self.peak
    }

    pub fn peak_value(&self) -> f64 {
        self.peak_value
    }
}

/// Correlates an image against the model's padded filter:
/// `response(r) = sum_u pad(h)(u) * image(u + r)` over circular shifts.
///
/// The image must live on the model's window grid; re-embed the model with
/// [`FilterModel::with_outer`] first when the sizes differ.
pub fn correlate(model: &FilterModel, image: &Signal2D) -> Result<ResponseMap> {
    if image.shape() != model.mask().outer() {
        return Err(Error::ShapeMismatch {
            context: "correlate image",
            expected: model.mask().outer(),
            got: image.shape(),
        });
    }
    let spectrum = dft2(image).hadamard(&model.padded_spectrum().conj())?;
    Ok(ResponseMap::from_response(idft2(&spectrum)?))
}

/// Center of the image patch the peak response points at: the filter
/// support starts at `mask offset + peak` (circularly), so the patch center
/// is that plus half the support, wrapped onto the grid.
pub fn predicted_center(model: &FilterModel, map: &ResponseMap) -> (usize, usize) {
    let (oh, ow) = model.mask().outer();
    let (ih, iw) = model.mask().inner();
    let (oy, ox) = model.mask().offset();
    let (pr, pc) = map.peak();
    ((oy + pr + ih / 2) % oh, (ox + pc + iw / 2) % ow)
}

/// Peak-to-sidelobe ratio: `(peak - mean(sidelobe)) / std(sidelobe)`, where
/// the sidelobe is everything outside the `(2 radius + 1)^2` square around
/// the peak (clipped at the map edges).
///
/// Fails if the exclusion square swallows the whole map or the sidelobe has
/// zero variance — in both cases the ratio carries no information.
pub fn psr(map: &ResponseMap, radius: usize) -> Result<f64> {
    let (h, w) = map.response().shape();
    let (pr, pc) = map.peak();
    let r = radius as isize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for i in 0..h {
        for j in 0..w {
            let in_rows = (i as isize - pr as isize).abs() <= r;
            let in_cols = (j as isize - pc as isize).abs() <= r;
            if in_rows && in_cols {
                continue;
            }
            let v = map.response().get(i, j);
            sum += v;
            sum_sq += v * v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Degenerate {
            context: "psr: exclusion square covers the whole response",
        });
    }
    let mean = sum / count as f64;
    let var = (sum_sq / count as f64 - mean * mean).max(0.0);
    let std = libm::sqrt(var);
    if std == 0.0 {
        return Err(Error::Degenerate {
            context: "psr: sidelobe has zero variance",
        });
    }
    Ok((map.peak_value() - mean) / std)
}

/// Euclidean localization error normalized by the distance between two
/// reference points (so a fixed threshold means the same thing at any
/// image scale). The reference points must not coincide.
pub fn normalized_distance(
    predicted: (f64, f64),
    actual: (f64, f64),
    reference_a: (f64, f64),
    reference_b: (f64, f64),
) -> Result<f64> {
    let ref_dist = libm::hypot(reference_a.0 - reference_b.0, reference_a.1 - reference_b.1);
    if ref_dist == 0.0 {
        return Err(Error::Degenerate {
            context: "normalized_distance: coincident reference points",
        });
    }
    if !ref_dist.is_finite() {
        return Err(Error::NonFinite {
            context: "normalized_distance reference points",
        });
    }
    let err = libm::hypot(predicted.0 - actual.0, predicted.1 - actual.1);
    if !err.is_finite() {
        return Err(Error::NonFinite {
            context: "normalized_distance centers",
        });
    }
    Ok(err / ref_dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{MaskSpec, ShiftVec, Signal2D};
    use crate::spectral::SpectralEnergies;
    use alloc::vec;

    fn delta_model(outer: (usize, usize)) -> FilterModel {
        // Single unit tap at the grid origin: correlation returns the image.
        let filter = Signal2D::new(1, 1, vec![1.0]).unwrap();
        let mask = MaskSpec::new(outer, (1, 1), (0, 0)).unwrap();
        let energies = SpectralEnergies::zeros(outer).unwrap();
        FilterModel::new(filter, energies, mask, 0.01).unwrap()
    }

    #[test]
    fn unit_tap_correlation_reproduces_the_image() {
        let model = delta_model((3, 4));
        let image = Signal2D::from_fn(3, 4, |i, j| (i * 4 + j) as f64).unwrap();
        let map = correlate(&model, &image).unwrap();
        for (a, b) in map.response().samples().iter().zip(image.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(map.peak(), (2, 3));
    }

    #[test]
    fn peak_tracks_circular_shifts_of_the_image() {
        let model = delta_model((5, 5));
        let image = Signal2D::gaussian_response(5, 5, (2.0, 2.0), 0.8).unwrap();
        let base = correlate(&model, &image).unwrap();
        assert_eq!(base.peak(), (2, 2));
        let moved = image.circular_shift(ShiftVec::new(1, -1));
        let map = correlate(&model, &moved).unwrap();
        assert_eq!(map.peak(), (3, 1));
    }

    #[test]
    fn shape_mismatch_requires_reembedding() {
        let model = delta_model((3, 3));
        let image = Signal2D::zeros(4, 4).unwrap();
        assert!(correlate(&model, &image).is_err());
        let larger = model.with_outer((4, 4)).unwrap();
        assert!(correlate(&larger, &image).is_ok());
    }

    #[test]
    fn psr_rewards_isolated_peaks() {
        let sharp = ResponseMap::from_response(
            Signal2D::gaussian_response(21, 21, (10.0, 10.0), 1.0).unwrap(),
        );
        let broad = ResponseMap::from_response(
            Signal2D::gaussian_response(21, 21, (10.0, 10.0), 6.0).unwrap(),
        );
        let sharp_psr = psr(&sharp, 2).unwrap();
        let broad_psr = psr(&broad, 2).unwrap();
        assert!(sharp_psr > broad_psr, "{sharp_psr} vs {broad_psr}");
    }

    #[test]
    fn psr_degenerates_on_flat_sidelobes() {
        // A lone impulse has an identically zero sidelobe: no variance.
        let mut samples = vec![0.0; 25];
        samples[12] = 1.0;
        let map = ResponseMap::from_response(Signal2D::new(5, 5, samples).unwrap());
        assert!(matches!(psr(&map, 1), Err(Error::Degenerate { .. })));
        // Exclusion radius covering the whole map is also degenerate.
        let noisy =
            ResponseMap::from_response(Signal2D::from_fn(3, 3, |i, j| (i * 3 + j) as f64).unwrap());
        assert!(matches!(psr(&noisy, 4), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn normalized_distance_uses_the_reference_scale() {
        let d = normalized_distance((0.0, 3.0), (4.0, 0.0), (0.0, 0.0), (0.0, 10.0)).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!(normalized_distance((0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (2.0, 2.0)).is_err());
    }

    #[test]
    fn predicted_center_wraps_on_the_grid() {
        let model = delta_model((4, 4));
        // Peak at (3, 3) with a 1x1 support at offset (0, 0): the patch
        // center is the peak itself.
        let mut samples = vec![0.0; 16];
        samples[15] = 2.0;
        let map = ResponseMap::from_response(Signal2D::new(4, 4, samples).unwrap());
        assert_eq!(predicted_center(&model, &map), (3, 3));
    }
}
