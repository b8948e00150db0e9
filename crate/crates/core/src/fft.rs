//! Internal fast Fourier transform kernels.
//!
//! Two strategies cover every length: an iterative radix-2 butterfly for
//! powers of two, and Bluestein's chirp-z reduction for everything else
//! (which re-expresses a length-`n` transform as a cyclic convolution of a
//! padded power-of-two length and so reuses the radix-2 path). Plans hold
//! only precomputed twiddle tables; they are cheap to build relative to the
//! transforms the callers batch over rows and columns.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

fn unit(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

pub(crate) struct Fft1d {
    n: usize,
    kind: Kind,
}

enum Kind {
    Identity,
    Radix2 {
        /// `w_k = exp(-2 pi i k / n)` for `k < n / 2`.
        twiddles: Vec<Complex64>,
    },
    Bluestein {
        /// `exp(-i pi k^2 / n)`, with `k^2` reduced modulo `2n` first so the
        /// angle stays small for large indices.
        chirp: Vec<Complex64>,
        /// Forward transform of the chirp kernel wrapped into length `m`.
        kernel_fft: Vec<Complex64>,
        inner: Box<Fft1d>,
        m: usize,
    },
}

impl Fft1d {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n > 0, "transform length must be positive");
        if n == 1 {
            return Self {
                n,
                kind: Kind::Identity,
            };
        }
        if n.is_power_of_two() {
            let twiddles = (0..n / 2)
                .map(|k| unit(-2.0 * PI * k as f64 / n as f64))
                .collect();
            return Self {
                n,
                kind: Kind::Radix2 { twiddles },
            };
        }
        // Bluestein: X[k] = chirp[k] * (a (*) b)[k] where a_j = x_j chirp[j]
        // and b_j = exp(+i pi j^2 / n). The cyclic convolution runs at any
        // length m >= 2n - 1; the next power of two keeps it on the fast path.
        let m = (2 * n - 1).next_power_of_two();
        let inner = Box::new(Fft1d::new(m));
        let modulus = 2 * n as u64;
        let angle = |j: usize| {
            let sq = (j as u64 * j as u64) % modulus;
            PI * sq as f64 / n as f64
        };
        let chirp: Vec<Complex64> = (0..n).map(|j| unit(-angle(j))).collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = unit(angle(0));
        for j in 1..n {
            let b = unit(angle(j));
            kernel[j] = b;
            kernel[m - j] = b; // b is even in j, so b_{-j} wraps to m - j
        }
        inner.forward(&mut kernel);
        Self {
            n,
            kind: Kind::Bluestein {
                chirp,
                kernel_fft: kernel,
                inner,
                m,
            },
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        match &self.kind {
            Kind::Identity => {}
            Kind::Radix2 { twiddles } => radix2_in_place(data, twiddles),
            Kind::Bluestein {
                chirp,
                kernel_fft,
                inner,
                m,
            } => {
                let mut a = vec![Complex64::new(0.0, 0.0); *m];
                for (j, slot) in data.iter().enumerate() {
                    a[j] = *slot * chirp[j];
                }
                inner.forward(&mut a);
                for (av, kv) in a.iter_mut().zip(kernel_fft) {
                    *av *= *kv;
                }
                inner.inverse(&mut a);
                for (k, slot) in data.iter_mut().enumerate() {
                    *slot = chirp[k] * a[k];
                }
            }
        }
    }

    /// Inverse transform including the `1/n` normalization, realized as
    /// `conj . forward . conj` so both directions share one kernel.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        for v in data.iter_mut() {
            *v = v.conj();
        }
        self.forward(data);
        let scale = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

fn radix2_in_place(data: &mut [Complex64], twiddles: &[Complex64]) {
    let n = data.len();
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    // Butterflies, doubling the block length each stage.
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let u = data[start + k];
                let v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// In-place 2-D forward transform of a row-major grid: every row, then
/// every column.
pub(crate) fn fft2(data: &mut [Complex64], height: usize, width: usize) {
    debug_assert_eq!(data.len(), height * width);
    let row_plan = Fft1d::new(width);
    for row in data.chunks_exact_mut(width) {
        row_plan.forward(row);
    }
    let col_plan = Fft1d::new(height);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for c in 0..width {
        for r in 0..height {
            column[r] = data[r * width + c];
        }
        col_plan.forward(&mut column);
        for r in 0..height {
            data[r * width + c] = column[r];
        }
    }
}

/// In-place 2-D inverse transform carrying the full `1/(height*width)`
/// normalization (split across the two passes).
pub(crate) fn ifft2(data: &mut [Complex64], height: usize, width: usize) {
    debug_assert_eq!(data.len(), height * width);
    let row_plan = Fft1d::new(width);
    for row in data.chunks_exact_mut(width) {
        row_plan.inverse(row);
    }
    let col_plan = Fft1d::new(height);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for c in 0..width {
        for r in 0..height {
            column[r] = data[r * width + c];
        }
        col_plan.inverse(&mut column);
        for r in 0..height {
            data[r * width + c] = column[r];
        }
    }
}
