//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Jacobi is slower than tridiagonal QL but delivers eigenvectors that are
//! orthonormal to working precision and small eigenvalues with high
//! relative accuracy, which is what the curvature tests need at the
//! dimensions this crate targets (n up to about 100).

use alloc::vec;
use alloc::vec::Vec;

use super::{norm, SymMatrix};
use crate::math;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Leftmost eigenpair of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub leftmost_value: f64,
    /// Unit eigenvector. The sign is fixed so the entry of largest magnitude
    /// is positive.
    pub leftmost_vector: Vec<f64>,
    /// `||H v - lambda v||_2`
    pub residual: f64,
}

/// Full spectrum, eigenvalues ascending; `vectors[i]` pairs with `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymmetricEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn symmetric_eigen(h: &SymMatrix) -> SymmetricEigen {
    let n = h.dim();
    let mut a: Vec<f64> = h.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = h.frobenius();
    let stop = {
        let t = 4.0 * f64::EPSILON * scale;
        t * t
    };

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= stop || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    let r = 1.0 / (math::abs(theta) + math::hypot(theta, 1.0));
                    if theta >= 0.0 {
                        r
                    } else {
                        -r
                    }
                } else {
                    0.0
                };
                if t == 0.0 {
                    continue;
                }
                let c = 1.0 / math::hypot(t, 1.0);
                let s = t * c;
                // A <- A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                // A <- J^T A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| {
            let mut col: Vec<f64> = (0..n).map(|k| v[k * n + j]).collect();
            normalize_sign(&mut col);
            col
        })
        .collect();
    SymmetricEigen { values, vectors }
}

/// Unit-normalizes and flips so the largest-magnitude entry is positive.
fn normalize_sign(x: &mut [f64]) {
    let nrm = norm(x);
    if nrm > 0.0 {
        for xi in x.iter_mut() {
            *xi /= nrm;
        }
    }
    let mut pivot = 0.0;
    for xi in x.iter() {
        if math::abs(*xi) > math::abs(pivot) {
            pivot = *xi;
        }
    }
    if pivot < 0.0 {
        for xi in x.iter_mut() {
            *xi = -*xi;
        }
    }
}

/// Smallest eigenvalue of `h` with a unit eigenvector.
///
/// Fails when `h` is asymmetric beyond [`super::SYMMETRY_TOLERANCE`] or the
/// computed pair misses `tolerance` on the residual `||Hv - lambda v||`.
pub fn leftmost_eigenpair(h: &SymMatrix, tolerance: f64) -> Result<EigenResult> {
    let asymmetry = h.asymmetry();
    if asymmetry > super::SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry });
    }
    if !h.is_finite() {
        return Err(Error::NonFiniteMatrix);
    }
    if h.dim() == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let eig = symmetric_eigen(h);
    let lambda = eig.values[0];
    let v = eig.vectors.into_iter().next().unwrap_or_default();
    let residual = residual(h, lambda, &v);
    if !(residual <= tolerance) {
        return Err(Error::EigenResidual { residual, tolerance });
    }
    Ok(EigenResult { leftmost_value: lambda, leftmost_vector: v, residual })
}

fn residual(h: &SymMatrix, lambda: f64, v: &[f64]) -> f64 {
    let hv = h.mul_vec(v);
    let r: Vec<f64> = hv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
    norm(&r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let h = SymMatrix::from_diagonal(&[2.0, -3.0]);
        let e = leftmost_eigenpair(&h, 1e-12).unwrap();
        assert_eq!(e.leftmost_value, -3.0);
        assert_eq!(e.leftmost_vector, [0.0, 1.0]);
        assert_eq!(e.residual, 0.0);
    }

    #[test]
    fn swap_matrix() {
        // det([[-l, 1], [1, -l]]) = l^2 - 1, so the leftmost value is -1 with
        // eigenvector (1, -1)/sqrt(2) up to sign.
        let h = SymMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let e = leftmost_eigenpair(&h, 1e-12).unwrap();
        assert!((e.leftmost_value + 1.0).abs() < 1e-15);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let v = &e.leftmost_vector;
        assert!((v[0].abs() - s).abs() < 1e-15);
        assert!((v[0] + v[1]).abs() < 1e-15);
    }

    #[test]
    fn identity_five() {
        let e = leftmost_eigenpair(&SymMatrix::identity(5), 1e-12).unwrap();
        assert_eq!(e.leftmost_value, 1.0);
        assert!((norm(&e.leftmost_vector) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_input_rejected() {
        // Bypass the checked constructor to hand the kernel a bad matrix.
        let mut h = SymMatrix::zeros(2);
        h.set_sym(0, 1, 1.0);
        let mut data = h.as_slice().to_vec();
        data[1] = 1.5;
        let bad = SymMatrix { n: 2, data };
        assert!(matches!(leftmost_eigenpair(&bad, 1e-12), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn full_spectrum_is_sorted_and_orthonormal() {
        let h = SymMatrix::from_rows(&[
            [4.0, 1.0, -2.0, 0.5],
            [1.0, -3.0, 0.0, 1.0],
            [-2.0, 0.0, 1.0, 2.0],
            [0.5, 1.0, 2.0, 0.0],
        ])
        .unwrap();
        let e = symmetric_eigen(&h);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..4 {
            for j in 0..4 {
                let d = super::super::dot(&e.vectors[i], &e.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-13);
            }
            assert!(residual(&h, e.values[i], &e.vectors[i]) < 1e-13);
        }
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 2.0).abs() < 1e-13);
    }
}
