use alloc::vec;
use alloc::vec::Vec;

use super::DirectionCriteria;
use crate::linalg::{dot, is_zero, leftmost_eigenpair, modified_newton_shift, norm, SymMatrix};
use crate::math;
use crate::{Error, Result};

// Relative slack for certificates that hold with equality in exact arithmetic.
const CERTIFY_SLACK: f64 = 1e-10;

/// Leftmost eigenvalue with the associated curvature direction (zero when
/// the eigenvalue is treated as nonnegative).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureDirection {
    pub direction: Vec<f64>,
    pub lambda: f64,
}

impl CurvatureDirection {
    pub fn is_zero(&self) -> bool {
        is_zero(&self.direction)
    }
}

pub(crate) fn eigen_tolerance(h: &SymMatrix) -> f64 {
    1e-9 * h.frobenius().max(1.0)
}

/// Leftmost eigenvalue of `h`.
pub fn leftmost_eigenvalue(h: &SymMatrix) -> Result<f64> {
    Ok(leftmost_eigenpair(h, eigen_tolerance(h))?.leftmost_value)
}

/// Leftmost eigenvector of `h` scaled to `|d| = theta |lambda|`, oriented so
/// `g'd <= 0`; zero when `lambda >= -criteria.curvature_threshold`.
pub fn negative_curvature_direction(h: &SymMatrix, g: &[f64], criteria: &DirectionCriteria) -> Result<CurvatureDirection> {
    if g.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: g.len() });
    }
    let pair = leftmost_eigenpair(h, eigen_tolerance(h))?;
    let lambda = pair.leftmost_value;
    if lambda >= -criteria.curvature_threshold {
        return Ok(CurvatureDirection { direction: vec![0.0; g.len()], lambda });
    }
    let mut scale = criteria.theta * lambda.abs();
    if dot(g, &pair.leftmost_vector) > 0.0 {
        scale = -scale;
    }
    let direction: Vec<f64> = pair.leftmost_vector.iter().map(|v| scale * v).collect();
    certify_curvature(h, g, &direction, lambda, criteria)?;
    Ok(CurvatureDirection { direction, lambda })
}

/// Checks `d'Hd <= gamma lambda |d|^2 < 0`, `g'd <= 0`, `|d| <= theta |lambda|`.
pub fn certify_curvature(h: &SymMatrix, g: &[f64], d: &[f64], lambda: f64, criteria: &DirectionCriteria) -> Result<()> {
    let dd = dot(d, d);
    let curvature = h.quad_form(d);
    let target = criteria.gamma * lambda * dd;
    // Rayleigh quotients of a computed eigenvector carry an absolute error
    // of order eps |H|.
    let slack = (CERTIFY_SLACK * lambda.abs() + 64.0 * f64::EPSILON * h.frobenius()) * dd;
    if !(target < 0.0) || curvature > target + slack {
        return Err(Error::ConditionViolation { condition: "curvature", value: curvature - target });
    }
    let gd = dot(g, d);
    if gd > 0.0 {
        return Err(Error::ConditionViolation { condition: "curvature direction ascent", value: gd });
    }
    let dn = math::sqrt(dd);
    let cap = criteria.theta * lambda.abs();
    if dn > cap * (1.0 + CERTIFY_SLACK) {
        return Err(Error::ConditionViolation { condition: "curvature direction length", value: dn - cap });
    }
    Ok(())
}

/// Descent-direction provider.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DescentStrategy {
    /// `s = -g`
    Steepest,
    /// `s = -(H + shift I)^{-1} g` with the smallest shift giving a positive
    /// definite matrix of condition number at most `condition_cap`.
    ModifiedNewton { condition_cap: f64 },
}

impl DescentStrategy {
    pub const DEFAULT_CONDITION_CAP: f64 = 1e8;

    pub fn modified_newton() -> Self {
        DescentStrategy::ModifiedNewton { condition_cap: Self::DEFAULT_CONDITION_CAP }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DescentStrategy::Steepest => "steepest",
            DescentStrategy::ModifiedNewton { .. } => "modified_newton",
        }
    }

    /// Largest cosine bound every direction from this provider meets.
    pub fn guaranteed_cosine(&self) -> f64 {
        match self {
            DescentStrategy::Steepest => 1.0,
            DescentStrategy::ModifiedNewton { condition_cap } => 1.0 / condition_cap,
        }
    }
}

/// Realized quality of a descent direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentCertificate {
    /// `-g's / (|g| |s|)`
    pub cosine: f64,
    /// `|s| / |g|`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentDirection {
    pub direction: Vec<f64>,
    pub certificate: DescentCertificate,
}

/// Descent direction at a point with nonzero gradient `g`; the realized
/// cosine must reach `criteria.delta`.
pub fn descent_direction(
    strategy: DescentStrategy,
    g: &[f64],
    h: &SymMatrix,
    criteria: &DirectionCriteria,
) -> Result<DescentDirection> {
    if g.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: g.len() });
    }
    if is_zero(g) {
        return Err(Error::config("descent direction requested at a zero gradient"));
    }
    let direction: Vec<f64> = match strategy {
        DescentStrategy::Steepest => g.iter().map(|v| -v).collect(),
        DescentStrategy::ModifiedNewton { condition_cap } => {
            let system = modified_newton_shift(h, condition_cap)?;
            system.solve(g).into_iter().map(|v| -v).collect()
        }
    };
    let certificate = certify_descent(g, &direction, criteria)?;
    Ok(DescentDirection { direction, certificate })
}

/// Realized cosine and length ratio of `s` against `g`; fails when the
/// cosine misses `criteria.delta`.
pub fn certify_descent(g: &[f64], s: &[f64], criteria: &DirectionCriteria) -> Result<DescentCertificate> {
    let (gn, sn) = (norm(g), norm(s));
    let cosine = -dot(g, s) / (gn * sn);
    let ratio = sn / gn;
    if !(cosine >= criteria.delta * (1.0 - CERTIFY_SLACK)) {
        return Err(Error::ConditionViolation { condition: "descent cosine", value: cosine });
    }
    Ok(DescentCertificate { cosine, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_direction_diagonal() {
        let h = SymMatrix::from_diagonal(&[2.0, -3.0]);
        let c = negative_curvature_direction(&h, &[1.0, 1.0], &DirectionCriteria::default()).unwrap();
        assert_eq!(c.lambda, -3.0);
        assert_eq!(c.direction, [0.0, -3.0]);
        assert_eq!(h.quad_form(&c.direction), -27.0);
    }

    #[test]
    fn curvature_direction_vanishes_for_positive_definite() {
        let h = SymMatrix::from_diagonal(&[2.0, 3.0]);
        let c = negative_curvature_direction(&h, &[5.0, -1.0], &DirectionCriteria::default()).unwrap();
        assert!(c.is_zero());
        assert_eq!(c.lambda, 2.0);
    }

    #[test]
    fn curvature_direction_at_zero_gradient() {
        let h = SymMatrix::from_diagonal(&[2.0, -3.0]);
        let c = negative_curvature_direction(&h, &[0.0, 0.0], &DirectionCriteria::default()).unwrap();
        assert_eq!(c.direction[0], 0.0);
        assert_eq!(c.direction[1].abs(), 3.0);
    }

    #[test]
    fn tiny_negative_eigenvalue_is_ignored() {
        let h = SymMatrix::from_diagonal(&[1.0, -1e-13]);
        let c = negative_curvature_direction(&h, &[1.0, 1.0], &DirectionCriteria::default()).unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn steepest_descent() {
        let h = SymMatrix::identity(2);
        let s = descent_direction(DescentStrategy::Steepest, &[3.0, 4.0], &h, &DirectionCriteria::default()).unwrap();
        assert_eq!(s.direction, [-3.0, -4.0]);
        assert_eq!(s.certificate.cosine, 1.0);
        assert_eq!(s.certificate.ratio, 1.0);
    }

    #[test]
    fn modified_newton_on_positive_definite() {
        let h = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let criteria = DirectionCriteria { delta: 0.5, ..Default::default() };
        let s = descent_direction(DescentStrategy::modified_newton(), &[1.0, 2.0], &h, &criteria).unwrap();
        assert!((s.direction[0] + 1.0).abs() < 1e-15 && (s.direction[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn modified_newton_cosine_self_check() {
        // s = (-1, -1) has cosine 3/sqrt(10) against g = (1, 2).
        let h = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let err = descent_direction(DescentStrategy::modified_newton(), &[1.0, 2.0], &h, &DirectionCriteria::default());
        assert!(matches!(err, Err(Error::ConditionViolation { .. })));
    }

    #[test]
    fn modified_newton_indefinite() {
        let h = SymMatrix::from_diagonal(&[-1.0, 2.0]);
        let criteria = DirectionCriteria { delta: 1e-8, ..Default::default() };
        let s = descent_direction(DescentStrategy::modified_newton(), &[1.0, 0.0], &h, &criteria).unwrap();
        let shift = 1.0 + 3.0 / (1e8 - 1.0);
        let expected = -1.0 / (shift - 1.0);
        assert!((s.direction[0] - expected).abs() <= 1e-6 * expected.abs());
        assert_eq!(s.direction[1], 0.0);
        assert!(s.certificate.cosine >= 1e-8);
    }
}
