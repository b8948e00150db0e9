//! Frequency-domain views of signals and the accumulated spectral
//! statistics the solvers consume.
//!
//! Conventions, fixed once here and relied on everywhere:
//!
//! * [`dft2`] is the plain unnormalized forward transform; [`idft2`]
//!   carries the full `1/(H*W)` factor, so `idft2(dft2(x)) == x`.
//! * With that split, Parseval reads
//!   `<a, b> = Re <dft2(a), dft2(b)> / (H*W)`.
//! * Auto- and cross-energies are accumulated as *sums* over exemplars,
//!   not averages; callers that want averages rescale explicitly.

use alloc::vec::Vec;
pub use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::Signal2D;

/// A complex 2-D coefficient grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    height: usize,
    width: usize,
    coefficients: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn new(height: usize, width: usize, coefficients: Vec<Complex64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter {
                name: "shape",
                message: "spectrum dimensions must be positive",
            });
        }
        if coefficients.len() != height * width {
            return Err(Error::LengthMismatch {
                context: "Spectrum2D::new",
                expected: height * width,
                got: coefficients.len(),
            });
        }
        if coefficients
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite {
                context: "Spectrum2D::new",
            });
        }
        Ok(Self {
            height,
            width,
            coefficients,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(
            height,
            width,
            alloc::vec![Complex64::new(0.0, 0.0); height * width],
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction forbids empty grids
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        debug_assert!(row < self.height && col < self.width);
        self.coefficients[row * self.width + col]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Sum of squared magnitudes over all coefficients.
    pub fn norm_sq(&self) -> f64 {
        self.coefficients.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|c| c * factor)
    }

    /// Element-wise rebuild. The closure's outputs are taken as-is; callers
    /// that can introduce non-finite values must check downstream.
    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            height: self.height,
            width: self.width,
            coefficients: self.coefficients.iter().map(|c| f(*c)).collect(),
        }
    }

    /// Element-wise combination of two same-shaped spectra.
    pub fn zip_map<F: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        other: &Self,
        f: F,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                context: "Spectrum2D::zip_map",
                expected: self.shape(),
                got: other.shape(),
            });
        }
        Ok(Self {
            height: self.height,
            width: self.width,
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }
}

/// Unnormalized forward transform of a real grid.
pub fn dft2(signal: &Signal2D) -> Spectrum2D {
    let (h, w) = signal.shape();
    let mut data: Vec<Complex64> = signal
        .samples()
        .iter()
        .map(|v| Complex64::new(*v, 0.0))
        .collect();
    fft::fft2(&mut data, h, w);
    Spectrum2D {
        height: h,
        width: w,
        coefficients: data,
    }
}

/// Inverse transform (carrying `1/(H*W)`) of a spectrum expected to come
/// from real data. If the imaginary residual exceeds
/// `1e-8 * max(1, max |Re|)` the spectrum was not conjugate-symmetric and
/// the call fails rather than silently discarding energy.
pub fn idft2(spectrum: &Spectrum2D) -> Result<Signal2D> {
    let (h, w) = spectrum.shape();
    let mut data = spectrum.coefficients.clone();
    fft::ifft2(&mut data, h, w);
    let max_re = data.iter().fold(0.0f64, |m, c| m.max(libm::fabs(c.re)));
    let residual = data.iter().fold(0.0f64, |m, c| m.max(libm::fabs(c.im)));
    if residual > 1e-8 * max_re.max(1.0) {
        return Err(Error::AsymmetricSpectrum { residual });
    }
    Signal2D::new(h, w, data.iter().map(|c| c.re).collect())
}

/// `sum_k a[k] * conj(b[k])` — the unnormalized frequency-domain inner
/// product used by Parseval checks and the solver objective.
pub fn inner_product(a: &Spectrum2D, b: &Spectrum2D) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            context: "inner_product",
            expected: a.shape(),
            got: b.shape(),
        });
    }
    Ok(a.coefficients
        .iter()
        .zip(&b.coefficients)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x * y.conj()))
}

/// Per-bin training statistics: the auto-energy `sum_i |x_i|^2` (kept with
/// an exactly-zero imaginary part) and the cross-energy
/// `sum_i y_i conj(x_i)`, both as sums over exemplars.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEnergies {
    auto: Spectrum2D,
    cross: Spectrum2D,
    count: usize,
}

impl SpectralEnergies {
    pub fn zeros(shape: (usize, usize)) -> Result<Self> {
        Ok(Self {
            auto: Spectrum2D::zeros(shape.0, shape.1)?,
            cross: Spectrum2D::zeros(shape.0, shape.1)?,
            count: 0,
        })
    }

    /// Rebuilds energies from stored grids (e.g. a deserialized model).
    pub fn from_parts(auto: Spectrum2D, cross: Spectrum2D, count: usize) -> Result<Self> {
        if auto.shape() != cross.shape() {
            return Err(Error::ShapeMismatch {
                context: "SpectralEnergies::from_parts",
                expected: auto.shape(),
                got: cross.shape(),
            });
        }
        if auto
            .coefficients()
            .iter()
            .any(|c| c.im != 0.0 || c.re < 0.0)
        {
            return Err(Error::Degenerate {
                context: "SpectralEnergies::from_parts: auto energy must be real and nonnegative",
            });
        }
        Ok(Self { auto, cross, count })
    }

    /// Sums energies over paired input/target exemplars.
    pub fn accumulate(inputs: &[Signal2D], targets: &[Signal2D]) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyInput {
                context: "SpectralEnergies::accumulate",
            });
        }
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch {
                context: "SpectralEnergies::accumulate",
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        let shape = inputs[0].shape();
        let mut out = Self::zeros(shape)?;
        for (x, y) in inputs.iter().zip(targets) {
            out.add_pair(x, y)?;
        }
        Ok(out)
    }

    /// Folds one additional exemplar pair into the sums.
    pub fn add_pair(&mut self, input: &Signal2D, target: &Signal2D) -> Result<()> {
        let (xs, ys) = self.pair_spectra(input, target)?;
        self.auto = self
            .auto
            .zip_map(&xs, |a, x| Complex64::new(a.re + x.norm_sqr(), 0.0))?;
        let term = ys.zip_map(&xs, |y, x| y * x.conj())?;
        self.cross = self.cross.add(&term)?;
        self.count += 1;
        Ok(())
    }

    /// Exponential moving-average update toward a single new exemplar:
    /// `e <- (1 - eta) e + eta e_new`. The exemplar count is treated as
    /// bookkeeping and clamped to at least one.
    pub fn ema_update(&mut self, input: &Signal2D, target: &Signal2D, eta: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "eta",
                message: "adaptation rate must lie in [0, 1]",
            });
        }
        let (xs, ys) = self.pair_spectra(input, target)?;
        self.auto = self.auto.zip_map(&xs, |a, x| {
            Complex64::new((1.0 - eta) * a.re + eta * x.norm_sqr(), 0.0)
        })?;
        self.cross = self.cross.zip_map(&xs, |c, _| c * (1.0 - eta))?;
        let term = ys.zip_map(&xs, |y, x| y * x.conj())?;
        self.cross = self.cross.zip_map(&term, |c, t| c + eta * t)?;
        self.count = self.count.max(1);
        Ok(())
    }

    /// Rescales both energy grids (e.g. converting sums to averages).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            auto: self.auto.map(|c| Complex64::new(c.re * factor, 0.0)),
            cross: self.cross.scaled(factor),
            count: self.count,
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn auto(&self) -> &Spectrum2D {
        &self.auto
    }

    pub fn cross(&self) -> &Spectrum2D {
        &self.cross
    }

    pub fn shape(&self) -> (usize, usize) {
        self.auto.shape()
    }

    /// Number of exemplar pairs folded in (bookkeeping only).
    pub fn count(&self) -> usize {
        self.count
    }

    fn pair_spectra(
        &self,
        input: &Signal2D,
        target: &Signal2D,
    ) -> Result<(Spectrum2D, Spectrum2D)> {
        if input.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                context: "SpectralEnergies input",
                expected: self.shape(),
                got: input.shape(),
            });
        }
        if target.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                context: "SpectralEnergies target",
                expected: self.shape(),
                got: target.shape(),
            });
        }
        Ok((dft2(input), dft2(target)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::ShiftVec;
    use alloc::vec;

    #[test]
    fn dft_of_two_by_two_matches_hand_computation() {
        let x = Signal2D::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = dft2(&x);
        let expect = [10.0, -2.0, -4.0, 0.0];
        for (c, e) in s.coefficients().iter().zip(expect) {
            assert!((c.re - e).abs() < 1e-12 && c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_carries_the_normalization() {
        let x = Signal2D::from_fn(5, 6, |i, j| (i * 7 + j) as f64 * 0.3 - 2.0).unwrap();
        let back = idft2(&dft2(&x)).unwrap();
        for (a, b) in back.samples().iter().zip(x.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval_relates_the_two_inner_products() {
        let a = Signal2D::from_fn(4, 4, |i, j| (i as f64 - 1.3) * (j as f64 + 0.7)).unwrap();
        let b = Signal2D::from_fn(4, 4, |i, j| libm::sin(i as f64) + j as f64).unwrap();
        let spatial = a.dot(&b).unwrap();
        let spectral = inner_product(&dft2(&a), &dft2(&b)).unwrap();
        assert!((spatial - spectral.re / 16.0).abs() < 1e-10);
        assert!(spectral.im.abs() / 16.0 < 1e-10);
    }

    #[test]
    fn shifted_signal_keeps_magnitudes() {
        let x = Signal2D::from_fn(3, 5, |i, j| (i * i + 2 * j) as f64).unwrap();
        let shifted = x.circular_shift(ShiftVec::new(2, 4));
        let sx = dft2(&x);
        let ss = dft2(&shifted);
        for (a, b) in sx.coefficients().iter().zip(ss.coefficients()) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-8);
        }
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let s = Spectrum2D::new(
            1,
            2,
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
        )
        .unwrap();
        assert!(matches!(idft2(&s), Err(Error::AsymmetricSpectrum { .. })));
    }

    #[test]
    fn energies_sum_over_exemplars_with_real_auto_part() {
        let x1 = Signal2D::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let x2 = Signal2D::new(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let y = Signal2D::new(2, 2, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let e = SpectralEnergies::accumulate(&[x1.clone(), x2], &[y.clone(), y.clone()]).unwrap();
        assert_eq!(e.count(), 2);
        // Both exemplars have unit-magnitude spectra, so auto = 2 everywhere.
        for c in e.auto().coefficients() {
            assert_eq!(c.im, 0.0);
            assert!((c.re - 2.0).abs() < 1e-12);
        }
        // Cross energy matches the direct per-bin sum.
        let direct = dft2(&y).hadamard(&dft2(&x1).conj()).unwrap();
        let c00 = e.cross().get(0, 0);
        assert!((c00.re - 2.0 * direct.get(0, 0).re).abs() < 1e-12);
    }

    #[test]
    fn ema_blends_toward_the_new_pair() {
        let x = Signal2D::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = Signal2D::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let mut e =
            SpectralEnergies::accumulate(core::slice::from_ref(&x), core::slice::from_ref(&y))
                .unwrap();
        let frozen = e.clone();
        // eta = 0 leaves the statistics untouched.
        e.ema_update(&x, &y, 0.0).unwrap();
        assert_eq!(e.auto(), frozen.auto());
        assert_eq!(e.cross(), frozen.cross());
        // eta = 1 replaces them entirely.
        let x2 = Signal2D::new(2, 2, vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        e.ema_update(&x2, &y, 1.0).unwrap();
        let fresh =
            SpectralEnergies::accumulate(core::slice::from_ref(&x2), core::slice::from_ref(&y))
                .unwrap();
        assert_eq!(e.auto(), fresh.auto());
        assert_eq!(e.cross(), fresh.cross());
        // Rates outside [0, 1] are rejected.
        assert!(e.ema_update(&x2, &y, 1.5).is_err());
    }
}
