use alloc::vec;
use alloc::vec::Vec;

use super::{axpy, dot, norm, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CgStatus {
    Converged,
    MaxIterations,
    NonpositiveCurvature,
    NonpositiveCurvatureFirstIteration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    /// Last CG iterate computed before stopping.
    pub solution: Vec<f64>,
    /// The search direction `p` with `p^T H p <= 0`, when one was met after
    /// the first iteration.
    pub curvature_direction: Option<Vec<f64>>,
    pub status: CgStatus,
    pub iterations_used: usize,
}

/// Residual tolerance for `H s = -g`: `min(1e-10, 1e-6 ||g||)`.
pub fn cg_tolerance(g: &[f64]) -> f64 {
    1e-10_f64.min(1e-6 * norm(g))
}

/// Conjugate gradients on `H s = -g` from `s = 0`, stopping at
/// `max_iterations`, at the residual tolerance, or as soon as a search
/// direction with `p^T H p <= 0` appears.
///
/// If that happens on the very first direction (`p = -g`) the outcome is
/// `s = -g` with no curvature direction. Otherwise `s` is the last accepted
/// iterate and `p` is returned as the curvature direction.
pub fn truncated_cg(h: &SymMatrix, g: &[f64], max_iterations: usize) -> CgOutcome {
    let n = g.len();
    let mut s = vec![0.0; n];
    let g_norm = norm(g);
    if g_norm == 0.0 {
        return CgOutcome {
            solution: s,
            curvature_direction: None,
            status: CgStatus::Converged,
            iterations_used: 0,
        };
    }
    let tol = cg_tolerance(g);
    let mut r = g.to_vec();
    let mut p: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut rr = dot(g, g);

    for i in 0..max_iterations.max(1) {
        let hp = h.mul_vec(&p);
        let curvature = dot(&p, &hp);
        if curvature <= 0.0 {
            if i == 0 {
                return CgOutcome {
                    solution: p,
                    curvature_direction: None,
                    status: CgStatus::NonpositiveCurvatureFirstIteration,
                    iterations_used: 1,
                };
            }
            return CgOutcome {
                solution: s,
                curvature_direction: Some(p),
                status: CgStatus::NonpositiveCurvature,
                iterations_used: i + 1,
            };
        }
        let step = rr / curvature;
        axpy(step, &p, &mut s);
        axpy(step, &hp, &mut r);
        let rr_next = dot(&r, &r);
        if rr_next <= tol * tol {
            return CgOutcome {
                solution: s,
                curvature_direction: None,
                status: CgStatus::Converged,
                iterations_used: i + 1,
            };
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = -ri + beta * *pi;
        }
    }
    CgOutcome {
        solution: s,
        curvature_direction: None,
        status: CgStatus::MaxIterations,
        iterations_used: max_iterations.max(1),
    }
}
