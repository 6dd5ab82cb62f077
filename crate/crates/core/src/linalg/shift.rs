use alloc::vec::Vec;

use super::{symmetric_eigen, Cholesky, SymMatrix};
use crate::{Error, Result};

/// Smallest shift used when `H` is a nonpositive multiple of the identity,
/// where every positive shift reaches condition number one.
pub const SHIFT_FLOOR: f64 = 1e-8;

// Relative slack on the condition cap absorbing rounding in the eigenvalues.
const CAP_SLACK: f64 = 1e-12;

/// `B = H + shift * I`, factored.
#[derive(Debug, Clone)]
pub struct ShiftedSystem {
    pub shift: f64,
    /// Extreme eigenvalues of `B`.
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    factor: Cholesky,
}

impl ShiftedSystem {
    /// Solves `B x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.factor.solve(rhs)
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eigenvalue / self.min_eigenvalue
    }
}

/// Smallest `delta >= 0` such that `H + delta I` is positive definite with
/// 2-norm condition number at most `condition_cap`.
///
/// With `lmin`, `lmax` the extreme eigenvalues of `H`, the condition
/// `(lmax + delta) / (lmin + delta) <= cap` solves in closed form to
/// `delta >= (lmax - cap * lmin) / (cap - 1)`.
pub fn modified_newton_shift(h: &SymMatrix, condition_cap: f64) -> Result<ShiftedSystem> {
    if !(condition_cap > 1.0) || !condition_cap.is_finite() {
        return Err(Error::config("condition cap must be finite and > 1"));
    }
    if !h.is_finite() {
        return Err(Error::NonFiniteMatrix);
    }
    let eig = symmetric_eigen(h);
    let (lmin, lmax) = (eig.min(), eig.max());
    let cap = condition_cap * (1.0 - CAP_SLACK);

    let mut shift = ((lmax - cap * lmin) / (cap - 1.0)).max(0.0);
    if lmin + shift <= 0.0 {
        shift = -lmin + SHIFT_FLOOR;
    }
    let b = h.shifted(shift);
    let factor = match Cholesky::factor(&b) {
        Ok(f) => f,
        Err(_) => {
            // Rounding left B numerically semidefinite; nudge up to the floor.
            shift += SHIFT_FLOOR;
            Cholesky::factor(&h.shifted(shift))?
        }
    };
    Ok(ShiftedSystem {
        shift,
        min_eigenvalue: lmin + shift,
        max_eigenvalue: lmax + shift,
        factor,
    })
}
