use crate::linalg::{dot, is_zero, norm, SymMatrix};
use crate::math;
use crate::{Error, Result};

/// `m_s(alpha) = -alpha g's - L alpha^2 |s|^2 / 2`
pub fn model_reduction_descent(g: &[f64], s: &[f64], lipschitz: f64, alpha: f64) -> f64 {
    -alpha * dot(g, s) - 0.5 * lipschitz * alpha * alpha * dot(s, s)
}

/// `m_d(beta) = -beta g'd - beta^2 d'Hd / 2 - sigma beta^3 |d|^3 / 6`
pub fn model_reduction_curvature(g: &[f64], d: &[f64], h: &SymMatrix, sigma: f64, beta: f64) -> f64 {
    let dn = norm(d);
    -beta * dot(g, d) - 0.5 * beta * beta * h.quad_form(d) - sigma / 6.0 * math::cube(beta) * math::cube(dn)
}

/// Maximizer of `m_s` over `alpha > 0`: `-g's / (L |s|^2)`.
pub fn optimal_descent_step(g: &[f64], s: &[f64], lipschitz: f64) -> Result<f64> {
    let gs = dot(g, s);
    if !(gs < 0.0) {
        return Err(Error::ConditionViolation { condition: "descent direction is not a descent direction", value: gs });
    }
    Ok(-gs / (lipschitz * dot(s, s)))
}

/// Positive root of `m_d'(beta) = 0`, i.e. of
/// `sigma |d|^3 beta^2 / 2 + c beta + g'd = 0` with `c = d'Hd`.
pub fn optimal_curvature_step(g: &[f64], d: &[f64], h: &SymMatrix, sigma: f64) -> Result<f64> {
    let c = h.quad_form(d);
    let gd = dot(g, d);
    let dn3 = math::cube(norm(d));
    if gd > 0.0 {
        return Err(Error::ConditionViolation { condition: "curvature direction ascent", value: gd });
    }
    let disc = math::sqrt(c * c - 2.0 * sigma * dn3 * gd);
    // Both forms are algebraically equal; pick the one free of cancellation.
    let beta = if c > 0.0 { -2.0 * gd / (c + disc) } else { (disc - c) / (sigma * dn3) };
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::ConditionViolation { condition: "curvature model has no positive maximizer", value: beta });
    }
    Ok(beta)
}

/// Model-maximizing stepsizes; absent when the corresponding direction is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepSizes {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

pub fn optimal_stepsizes(g: &[f64], s: &[f64], d: &[f64], h: &SymMatrix, state: &LipschitzState) -> Result<StepSizes> {
    let alpha = if is_zero(s) { None } else { Some(optimal_descent_step(g, s, state.gradient)?) };
    let beta = if is_zero(d) { None } else { Some(optimal_curvature_step(g, d, h, state.hessian)?) };
    Ok(StepSizes { alpha, beta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzKind {
    Gradient,
    Hessian,
}

/// Estimate that makes the model reduction match the observed decrease:
/// `L + 2 (f_trial - f + m) / (alpha^2 |s|^2)` for the gradient kind and
/// `sigma + 6 (f_trial - f + m) / (beta^3 |d|^3)` for the Hessian kind.
pub fn lipschitz_hat(
    kind: LipschitzKind,
    f_trial: f64,
    f_current: f64,
    model_reduction: f64,
    stepsize: f64,
    direction_norm: f64,
    current_estimate: f64,
) -> f64 {
    let excess = f_trial - f_current + model_reduction;
    match kind {
        LipschitzKind::Gradient => current_estimate + 2.0 * excess / (stepsize * stepsize * direction_norm * direction_norm),
        LipschitzKind::Hessian => current_estimate + 6.0 * excess / (math::cube(stepsize) * math::cube(direction_norm)),
    }
}

/// Running estimates of the gradient and Hessian Lipschitz constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LipschitzState {
    pub gradient: f64,
    pub hessian: f64,
    /// Minimum growth factor on a failed decrease test.
    pub rho: f64,
    /// Maximum growth factor on a failed decrease test.
    pub clamp_up_factor: f64,
    /// Maximum shrink factor after an accepted step.
    pub clamp_down_factor: f64,
    pub absolute_floor: f64,
}

impl Default for LipschitzState {
    fn default() -> Self {
        LipschitzState::new(1.0, 1.0)
    }
}

impl LipschitzState {
    pub fn new(gradient: f64, hessian: f64) -> Self {
        LipschitzState {
            gradient,
            hessian,
            rho: 2.0,
            clamp_up_factor: 1e3,
            clamp_down_factor: 1e-3,
            absolute_floor: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.gradient) || !pos(self.hessian) {
            return Err(Error::config("Lipschitz estimates must be positive"));
        }
        if !(self.rho > 1.0) || !(self.clamp_up_factor >= self.rho) || !self.clamp_up_factor.is_finite() {
            return Err(Error::config("need 1 < rho <= clamp_up_factor"));
        }
        if !(self.clamp_down_factor > 0.0 && self.clamp_down_factor <= 1.0) || !pos(self.absolute_floor) {
            return Err(Error::config("need 0 < clamp_down_factor <= 1 and a positive floor"));
        }
        Ok(())
    }

    pub fn get(&self, kind: LipschitzKind) -> f64 {
        match kind {
            LipschitzKind::Gradient => self.gradient,
            LipschitzKind::Hessian => self.hessian,
        }
    }

    fn slot(&mut self, kind: LipschitzKind) -> &mut f64 {
        match kind {
            LipschitzKind::Gradient => &mut self.gradient,
            LipschitzKind::Hessian => &mut self.hessian,
        }
    }

    /// After a failed decrease test: `max(rho v, min(clamp_up v, hat))`.
    pub fn inflate(&mut self, kind: LipschitzKind, hat: f64) {
        let (rho, up) = (self.rho, self.clamp_up_factor);
        let v = self.slot(kind);
        let capped = if hat.is_nan() { up * *v } else { hat.min(up * *v) };
        *v = (rho * *v).max(capped);
    }

    /// After an accepted step: `max(floor, clamp_down v, hat)`.
    pub fn relax(&mut self, kind: LipschitzKind, hat: f64) {
        let (floor, down) = (self.absolute_floor, self.clamp_down_factor);
        let v = self.slot(kind);
        let hat = if hat.is_nan() { *v } else { hat };
        *v = floor.max(down * *v).max(hat);
    }
}
