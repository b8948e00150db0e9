//! Property tests for the structural identities the toolkit is built on:
//! shift algebra, crop/pad adjointness, transform round-trips, Parseval,
//! the correlation theorem, and normalization invariances. These are the
//! invariants every solver and the tracker silently rely on, so they are
//! exercised over randomized shapes (prime sizes included) rather than a
//! few hand-picked cases.

use corrfilt_core::detect::correlate;
use corrfilt_core::signal::{unaffected_shift_count, MaskSpec, ShiftVec, Signal2D};
use corrfilt_core::solvers::FilterModel;
use corrfilt_core::spectral::{dft2, idft2, inner_product, SpectralEnergies};
use proptest::prelude::*;

/// A random grid with entries in [-1, 1], any shape in [1, max] x [1, max].
fn grid(max: usize) -> impl Strategy<Value = Signal2D> {
    (1..=max, 1..=max)
        .prop_flat_map(|(h, w)| {
            proptest::collection::vec(-1.0f64..1.0, h * w)
                .prop_map(move |v| Signal2D::new(h, w, v).unwrap())
        })
        .no_shrink()
}

/// A random mask geometry together with support and window contents.
fn masked_pair(max: usize) -> impl Strategy<Value = (MaskSpec, Signal2D, Signal2D)> {
    (1..=max, 1..=max)
        .prop_flat_map(move |(oh, ow)| (Just((oh, ow)), 1..=oh, 1..=ow))
        .prop_flat_map(|((oh, ow), ih, iw)| {
            (
                Just(((oh, ow), (ih, iw))),
                0..=(oh - ih),
                0..=(ow - iw),
                proptest::collection::vec(-1.0f64..1.0, ih * iw),
                proptest::collection::vec(-1.0f64..1.0, oh * ow),
            )
        })
        .prop_map(|(((oh, ow), (ih, iw)), oy, ox, small, big)| {
            (
                MaskSpec::new((oh, ow), (ih, iw), (oy, ox)).unwrap(),
                Signal2D::new(ih, iw, small).unwrap(),
                Signal2D::new(oh, ow, big).unwrap(),
            )
        })
        .no_shrink()
}

fn max_abs_diff(a: &Signal2D, b: &Signal2D) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Reference circular cross-correlation, straight from the definition:
/// `out(r) = sum_u g(u) x(u + r)` with all indices wrapped.
fn naive_correlate(filter_padded: &Signal2D, image: &Signal2D) -> Signal2D {
    let (h, w) = image.shape();
    Signal2D::from_fn(h, w, |r0, r1| {
        let mut acc = 0.0;
        for u0 in 0..h {
            for u1 in 0..w {
                acc += filter_padded.get(u0, u1) * image.get((u0 + r0) % h, (u1 + r1) % w);
            }
        }
        acc
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circular_shifts_compose_and_invert(
        x in grid(9),
        dy0 in -12isize..12, dx0 in -12isize..12,
        dy1 in -12isize..12, dx1 in -12isize..12,
    ) {
        let two_steps = x
            .circular_shift(ShiftVec::new(dy0, dx0))
            .circular_shift(ShiftVec::new(dy1, dx1));
        let one_step = x.circular_shift(ShiftVec::new(dy0 + dy1, dx0 + dx1));
        prop_assert_eq!(two_steps.samples(), one_step.samples());
        let back = x
            .circular_shift(ShiftVec::new(dy0, dx0))
            .circular_shift(ShiftVec::new(-dy0, -dx0));
        prop_assert_eq!(back.samples(), x.samples());
    }

    #[test]
    fn crop_is_the_adjoint_of_pad((mask, small, big) in masked_pair(8)) {
        // <pad(s), b> on the window grid equals <s, crop(b)> on the support.
        let lhs = mask.pad(&small).unwrap().dot(&big).unwrap();
        let rhs = small.dot(&mask.crop(&big).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        // And pad followed by crop is the identity on the support.
        let round = mask.crop(&mask.pad(&small).unwrap()).unwrap();
        prop_assert_eq!(round.samples(), small.samples());
    }

    #[test]
    fn transforms_round_trip_on_any_size(x in grid(13)) {
        // Sizes include primes (7, 11, 13), so both transform code paths
        // (power-of-two and odd-length) are exercised.
        let back = idft2(&dft2(&x)).unwrap();
        prop_assert!(max_abs_diff(&back, &x) <= 1e-10);
    }

    #[test]
    fn parseval_relates_grid_and_spectrum(
        (x, y) in (1usize..=9, 1usize..=9).prop_flat_map(|(h, w)| {
            (
                proptest::collection::vec(-1.0f64..1.0, h * w)
                    .prop_map(move |v| Signal2D::new(h, w, v).unwrap()),
                proptest::collection::vec(-1.0f64..1.0, h * w)
                    .prop_map(move |v| Signal2D::new(h, w, v).unwrap()),
            )
        }).no_shrink()
    ) {
        let t = (x.shape().0 * x.shape().1) as f64;
        let spectral = inner_product(&dft2(&x), &dft2(&y)).unwrap();
        let spatial = x.dot(&y).unwrap();
        prop_assert!((spectral.re - t * spatial).abs() <= 1e-9 * t * spatial.abs().max(1.0));
        prop_assert!(spectral.im.abs() <= 1e-9 * t);
    }

    #[test]
    fn spectral_correlation_matches_the_definition((mask, small, big) in masked_pair(8)) {
        let energies = SpectralEnergies::zeros(mask.outer()).unwrap();
        let model = FilterModel::new(small.clone(), energies, mask, 1e-2).unwrap();
        let fast = correlate(&model, &big).unwrap();
        let slow = naive_correlate(&mask.pad(&small).unwrap(), &big);
        prop_assert!(max_abs_diff(fast.response(), &slow) <= 1e-9);
    }

    #[test]
    fn correlation_is_shift_equivariant(
        (mask, small, big) in masked_pair(8),
        dy in -6isize..6,
        dx in -6isize..6,
    ) {
        let energies = SpectralEnergies::zeros(mask.outer()).unwrap();
        let model = FilterModel::new(small.clone(), energies, mask, 1e-2).unwrap();
        let base = correlate(&model, &big).unwrap();
        let moved = correlate(&model, &big.circular_shift(ShiftVec::new(dy, dx))).unwrap();
        let expected = base.response().circular_shift(ShiftVec::new(dy, dx));
        prop_assert!(max_abs_diff(moved.response(), &expected) <= 1e-9);
    }

    #[test]
    fn normalization_ignores_gain_and_offset(
        x in grid(9),
        gain in 0.05f64..50.0,
        offset in -20.0f64..20.0,
    ) {
        let spread = x
            .samples()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            });
        prop_assume!(spread.1 - spread.0 > 1e-6);
        let direct = x.power_normalize().unwrap();
        let transformed = x
            .scaled(gain)
            .add(&Signal2D::from_fn(x.shape().0, x.shape().1, |_, _| offset).unwrap())
            .unwrap()
            .power_normalize()
            .unwrap();
        prop_assert!(max_abs_diff(&direct, &transformed) <= 1e-9);
    }

    #[test]
    fn unaffected_count_depends_only_on_the_lengths(
        window in 1usize..=32,
        filter_frac in 0.0f64..1.0,
        offset_frac in 0.0f64..1.0,
    ) {
        let filter = 1 + (filter_frac * (window - 1) as f64) as usize;
        let offset = (offset_frac * (window - 1) as f64) as usize;
        let count = unaffected_shift_count(window, filter, offset).unwrap();
        prop_assert_eq!(count, window - filter + 1);
    }

    #[test]
    fn gaussian_response_peaks_where_asked(
        h in 3usize..=12,
        w in 3usize..=12,
        cy_frac in 0.0f64..1.0,
        cx_frac in 0.0f64..1.0,
    ) {
        let cy = (cy_frac * (h - 1) as f64).round();
        let cx = (cx_frac * (w - 1) as f64).round();
        let response = Signal2D::gaussian_response(h, w, (cy, cx), 1.5).unwrap();
        let mut best = (0, 0);
        let mut best_value = f64::NEG_INFINITY;
        for i in 0..h {
            for j in 0..w {
                if response.get(i, j) > best_value {
                    best_value = response.get(i, j);
                    best = (i, j);
                }
            }
        }
        prop_assert_eq!(best, (cy as usize, cx as usize));
        prop_assert!((best_value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn shifting_preserves_spectral_magnitudes(x in grid(9), dy in -6isize..6, dx in -6isize..6) {
        let original = dft2(&x);
        let shifted = dft2(&x.circular_shift(ShiftVec::new(dy, dx)));
        for (a, b) in original.coefficients().iter().zip(shifted.coefficients()) {
            let (ma, mb) = (a.norm_sqr().sqrt(), b.norm_sqr().sqrt());
            prop_assert!((ma - mb).abs() <= 1e-9 * ma.max(1.0));
        }
    }
}
