//! Minimal dense linear algebra for the exact reference solvers.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Solves `A x = b` for a symmetric positive-definite `A` (row-major,
/// `n x n`) via an in-place Cholesky factorization. Only the lower triangle
/// of `A` is read. Fails if a pivot is not strictly positive.
pub(crate) fn solve_spd(matrix: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    if matrix.len() != n * n {
        return Err(Error::LengthMismatch {
            context: "solve_spd matrix",
            expected: n * n,
            got: matrix.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput {
            context: "solve_spd",
        });
    }
    // Factor A = L L^T, storing L in the lower triangle.
    let mut l = matrix.to_vec();
    for j in 0..n {
        let mut diag = l[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::Singular {
                context: "solve_spd: non-positive pivot",
            });
        }
        let root = libm::sqrt(diag);
        l[j * n + j] = root;
        for i in (j + 1)..n {
            let mut value = l[i * n + j];
            for k in 0..j {
                value -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = value / root;
        }
    }
    // Forward substitution L z = b.
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut value = rhs[i];
        for k in 0..i {
            value -= l[i * n + k] * z[k];
        }
        z[i] = value / l[i * n + i];
    }
    // Back substitution L^T x = z.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut value = z[i];
        for k in (i + 1)..n {
            value -= l[k * n + i] * x[k];
        }
        x[i] = value / l[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_known_spd_system() {
        // A = [[4, 2], [2, 3]], b = [2, 5] -> x = [-0.5, 2].
        let a = [4.0, 2.0, 2.0, 3.0];
        let b = [2.0, 5.0];
        let x = solve_spd(&a, &b).unwrap();
        assert!((x[0] + 0.5).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_matrices() {
        let a = [1.0, 2.0, 2.0, 1.0]; // eigenvalues 3 and -1
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0]),
            Err(Error::Singular { .. })
        ));
    }
}
