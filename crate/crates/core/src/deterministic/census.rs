use super::{negative_part, SolverReport};
use crate::math;

/// Iteration counts against worst-case complexity bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Census {
    /// Steps taken at points with `|g| > epsilon_g`.
    pub count_g: usize,
    /// Steps taken at points with `|min(lambda, 0)| > epsilon_h`.
    pub count_h: usize,
    /// `2 L_max (f_1 - f_inf) / (delta^2 epsilon_g^2)`; needs a lower bound.
    pub bound_g: Option<f64>,
    /// `3 sigma_max^2 (f_1 - f_inf) / (2 gamma^3 epsilon_h^3)`; needs a lower
    /// bound and curvature steps enabled.
    pub bound_h: Option<f64>,
}

/// `L_max`, `sigma_max` are the largest estimates in force at acceptance.
pub fn complexity_census(report: &SolverReport, epsilon_g: f64, epsilon_h: f64) -> Census {
    let count_g = report.steps().filter(|r| r.gradient_norm > epsilon_g).count();
    let count_h = report.steps().filter(|r| negative_part(r.lambda) > epsilon_h).count();
    let gap = match (report.records.first(), report.lower_bound) {
        (Some(r), Some(f_inf)) => Some((r.f - f_inf).max(0.0)),
        _ => None,
    };
    let c = &report.criteria;
    let bound_g = gap.map(|gap| 2.0 * report.max_lipschitz_gradient() * gap / (c.delta * c.delta * epsilon_g * epsilon_g));
    let bound_h = gap.filter(|_| report.curvature_enabled).map(|gap| {
        let s = report.max_lipschitz_hessian();
        3.0 * s * s * gap / (2.0 * math::cube(c.gamma) * math::cube(epsilon_h))
    });
    Census { count_g, count_h, bound_g, bound_h }
}
