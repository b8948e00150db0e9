//! Real-valued 2-D sample grids and the windowing/masking vocabulary built
//! on top of them.
//!
//! Everything downstream (transforms, solvers, the tracker) speaks
//! [`Signal2D`]. The type keeps its buffer private so that a constructed
//! signal always has consistent dimensions and finite samples.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// An integer translation on a periodic grid. Positive `dy` moves content
/// toward larger row indices, positive `dx` toward larger column indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftVec {
    pub dy: isize,
    pub dx: isize,
}

impl ShiftVec {
    pub fn new(dy: isize, dx: isize) -> Self {
        Self { dy, dx }
    }
}

/// A dense real grid stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal2D {
    height: usize,
    width: usize,
    samples: Vec<f64>,
}

impl Signal2D {
    /// Wraps an existing row-major buffer. Rejects empty dimensions,
    /// length mismatches, and non-finite samples.
    pub fn new(height: usize, width: usize, samples: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter {
                name: "shape",
                message: "signal dimensions must be positive",
            });
        }
        if samples.len() != height * width {
            return Err(Error::LengthMismatch {
                context: "Signal2D::new",
                expected: height * width,
                got: samples.len(),
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "Signal2D::new",
            });
        }
        Ok(Self {
            height,
            width,
            samples,
        })
    }

    /// All-zero grid of the given shape.
    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![0.0; height.max(1) * width.max(1)])
    }

    /// Builds a grid by evaluating `f(row, col)` at every sample.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(
        height: usize,
        width: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                samples.push(f(i, j));
            }
        }
        Self::new(height, width, samples)
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
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction forbids empty grids
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.samples[row * self.width + col]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn norm_sq(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other, "Signal2D::dot")?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Periodic translation: output `(i, j)` reads input
    /// `((i - dy) mod H, (j - dx) mod W)`.
    pub fn circular_shift(&self, shift: ShiftVec) -> Self {
        let h = self.height as isize;
        let w = self.width as isize;
        let mut out = Vec::with_capacity(self.samples.len());
        for i in 0..h {
            let src_i = (i - shift.dy).rem_euclid(h) as usize;
            for j in 0..w {
                let src_j = (j - shift.dx).rem_euclid(w) as usize;
                out.push(self.samples[src_i * self.width + src_j]);
            }
        }
        Self {
            height: self.height,
            width: self.width,
            samples: out,
        }
    }

    /// Periodic coordinate reversal: output `(i, j)` reads input
    /// `((-i) mod H, (-j) mod W)`. Applying it twice is the identity.
    pub fn reflect(&self) -> Self {
        let h = self.height as isize;
        let w = self.width as isize;
        let mut out = Vec::with_capacity(self.samples.len());
        for i in 0..h {
            let src_i = (-i).rem_euclid(h) as usize;
            for j in 0..w {
                let src_j = (-j).rem_euclid(w) as usize;
                out.push(self.samples[src_i * self.width + src_j]);
            }
        }
        Self {
            height: self.height,
            width: self.width,
            samples: out,
        }
    }

    /// Shifts to zero mean and unit population variance. A constant grid
    /// has nothing to normalize and is rejected.
    pub fn power_normalize(&self) -> Result<Self> {
        let mean = self.mean();
        let var = self
            .samples
            .iter()
            .map(|v| {
                let d = v - mean;
                d * d
            })
            .sum::<f64>()
            / self.samples.len() as f64;
        let std = libm::sqrt(var);
        if std == 0.0 {
            return Err(Error::Degenerate {
                context: "power_normalize: zero variance",
            });
        }
        let samples = self.samples.iter().map(|v| (v - mean) / std).collect();
        Ok(Self {
            height: self.height,
            width: self.width,
            samples,
        })
    }

    /// Element-wise product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "Signal2D::hadamard")?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            height: self.height,
            width: self.width,
            samples,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            samples: self.samples.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "Signal2D::add")?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            height: self.height,
            width: self.width,
            samples,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "Signal2D::sub")?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            height: self.height,
            width: self.width,
            samples,
        })
    }

    /// Copies a `shape`-sized rectangle whose top-left corner sits at
    /// `origin` (which may be negative or run past the edge); reads outside
    /// the grid clamp to the nearest border sample.
    pub fn clamped_window(&self, origin: (isize, isize), shape: (usize, usize)) -> Result<Self> {
        let (oh, ow) = shape;
        let mut samples = Vec::with_capacity(oh * ow);
        for i in 0..oh as isize {
            let src_i = (origin.0 + i).clamp(0, self.height as isize - 1) as usize;
            for j in 0..ow as isize {
                let src_j = (origin.1 + j).clamp(0, self.width as isize - 1) as usize;
                samples.push(self.samples[src_i * self.width + src_j]);
            }
        }
        Signal2D::new(oh, ow, samples)
    }

    /// Bilinear sample at fractional coordinates, clamping to the border.
    pub fn sample_bilinear(&self, row: f64, col: f64) -> f64 {
        let r = row.clamp(0.0, (self.height - 1) as f64);
        let c = col.clamp(0.0, (self.width - 1) as f64);
        let r0 = libm::floor(r) as usize;
        let c0 = libm::floor(c) as usize;
        let r1 = (r0 + 1).min(self.height - 1);
        let c1 = (c0 + 1).min(self.width - 1);
        let fr = r - r0 as f64;
        let fc = c - c0 as f64;
        let top = self.get(r0, c0) * (1.0 - fc) + self.get(r0, c1) * fc;
        let bottom = self.get(r1, c0) * (1.0 - fc) + self.get(r1, c1) * fc;
        top * (1.0 - fr) + bottom * fr
    }

    /// Separable Hann taper: `hann(i, n) = 0.5 (1 - cos(2 pi i / (n - 1)))`.
    /// Both dimensions must be at least 2 so the denominator is defined.
    pub fn cosine_window(height: usize, width: usize) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::InvalidParameter {
                name: "shape",
                message: "cosine window needs both dimensions >= 2",
            });
        }
        let hann =
            |i: usize, n: usize| 0.5 * (1.0 - libm::cos(2.0 * PI * i as f64 / (n - 1) as f64));
        Self::from_fn(height, width, |i, j| hann(i, height) * hann(j, width))
    }

    /// Isotropic Gaussian bump `exp(-((i-cy)^2 + (j-cx)^2) / (2 sigma^2))`.
    /// The (possibly fractional) center must lie inside the grid.
    pub fn gaussian_response(
        height: usize,
        width: usize,
        center: (f64, f64),
        sigma: f64,
    ) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                message: "gaussian width must be positive and finite",
            });
        }
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter {
                name: "shape",
                message: "signal dimensions must be positive",
            });
        }
        let (cy, cx) = center;
        if !cy.is_finite()
            || !cx.is_finite()
            || cy < 0.0
            || cx < 0.0
            || cy > (height - 1) as f64
            || cx > (width - 1) as f64
        {
            return Err(Error::OutOfBounds {
                context: "gaussian_response center",
            });
        }
        let denom = 2.0 * sigma * sigma;
        Self::from_fn(height, width, |i, j| {
            let dy = i as f64 - cy;
            let dx = j as f64 - cx;
            libm::exp(-(dy * dy + dx * dx) / denom)
        })
    }

    fn check_same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                context,
                expected: self.shape(),
                got: other.shape(),
            });
        }
        Ok(())
    }
}

/// Placement of a small filter support inside a larger periodic window:
/// an `inner` rectangle at `offset` within an `outer` grid.
///
/// `crop` and `pad` are adjoint restriction/extension maps between the two
/// shapes; padding fills the complement of the support with zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskSpec {
    outer: (usize, usize),
    inner: (usize, usize),
    offset: (usize, usize),
}

impl MaskSpec {
    pub fn new(
        outer: (usize, usize),
        inner: (usize, usize),
        offset: (usize, usize),
    ) -> Result<Self> {
        if outer.0 == 0 || outer.1 == 0 || inner.0 == 0 || inner.1 == 0 {
            return Err(Error::InvalidParameter {
                name: "mask",
                message: "mask dimensions must be positive",
            });
        }
        if offset.0 + inner.0 > outer.0 || offset.1 + inner.1 > outer.1 {
            return Err(Error::OutOfBounds {
                context: "MaskSpec::new: inner rectangle exceeds outer grid",
            });
        }
        Ok(Self {
            outer,
            inner,
            offset,
        })
    }

    /// Mask whose support is the whole window.
    pub fn identity(shape: (usize, usize)) -> Result<Self> {
        Self::new(shape, shape, (0, 0))
    }

    /// Inner rectangle centered in the outer grid (rounded toward the
    /// top-left when the margin is odd).
    pub fn centered(outer: (usize, usize), inner: (usize, usize)) -> Result<Self> {
        if inner.0 > outer.0 || inner.1 > outer.1 {
            return Err(Error::OutOfBounds {
                context: "MaskSpec::centered: inner rectangle exceeds outer grid",
            });
        }
        Self::new(
            outer,
            inner,
            ((outer.0 - inner.0) / 2, (outer.1 - inner.1) / 2),
        )
    }

    pub fn outer(&self) -> (usize, usize) {
        self.outer
    }

    pub fn inner(&self) -> (usize, usize) {
        self.inner
    }

    pub fn offset(&self) -> (usize, usize) {
        self.offset
    }

    pub fn outer_len(&self) -> usize {
        self.outer.0 * self.outer.1
    }

    pub fn inner_len(&self) -> usize {
        self.inner.0 * self.inner.1
    }

    pub fn is_identity(&self) -> bool {
        self.inner == self.outer
    }

    /// Restricts an outer-shaped signal to the support rectangle.
    pub fn crop(&self, signal: &Signal2D) -> Result<Signal2D> {
        if signal.shape() != self.outer {
            return Err(Error::ShapeMismatch {
                context: "MaskSpec::crop",
                expected: self.outer,
                got: signal.shape(),
            });
        }
        Signal2D::from_fn(self.inner.0, self.inner.1, |i, j| {
            signal.get(self.offset.0 + i, self.offset.1 + j)
        })
    }

    /// Embeds an inner-shaped signal at the support rectangle, zero
    /// everywhere else.
    pub fn pad(&self, signal: &Signal2D) -> Result<Signal2D> {
        if signal.shape() != self.inner {
            return Err(Error::ShapeMismatch {
                context: "MaskSpec::pad",
                expected: self.inner,
                got: signal.shape(),
            });
        }
        Signal2D::from_fn(self.outer.0, self.outer.1, |i, j| {
            let in_rows = i >= self.offset.0 && i < self.offset.0 + self.inner.0;
            let in_cols = j >= self.offset.1 && j < self.offset.1 + self.inner.1;
            if in_rows && in_cols {
                signal.get(i - self.offset.0, j - self.offset.1)
            } else {
                0.0
            }
        })
    }
}

/// Counts the circular shifts of a length-`filter_len` support (initially at
/// `offset`) that keep the support contiguous inside a length-`window_len`
/// periodic axis, i.e. sample runs that never cross the wrap-around seam.
///
/// The count is established by directly walking every shift rather than by
/// a closed form, so it doubles as a reference for boundary bookkeeping.
pub fn unaffected_shift_count(
    window_len: usize,
    filter_len: usize,
    offset: usize,
) -> Result<usize> {
    if window_len == 0 || filter_len == 0 {
        return Err(Error::InvalidParameter {
            name: "lengths",
            message: "window and filter lengths must be positive",
        });
    }
    if filter_len > window_len {
        return Err(Error::InvalidParameter {
            name: "filter_len",
            message: "filter support cannot exceed the window",
        });
    }
    if offset >= window_len {
        return Err(Error::OutOfBounds {
            context: "unaffected_shift_count offset",
        });
    }
    let t = window_len as isize;
    let mut count = 0usize;
    for r in 0..window_len as isize {
        let contiguous = (1..filter_len as isize).all(|step| {
            let prev = (offset as isize + r + step - 1).rem_euclid(t);
            let here = (offset as isize + r + step).rem_euclid(t);
            here == prev + 1
        });
        if contiguous {
            count += 1;
        }
    }
    Ok(count)
}
