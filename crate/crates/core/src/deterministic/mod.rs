//! Deterministic methods: the fixed-stepsize two-step method and the
//! dynamic method with adaptive Lipschitz estimates.

mod census;
mod directions;
mod dynamic;
mod model;
mod two_step;

use alloc::string::String;
use alloc::vec::Vec;

pub use census::{complexity_census, Census};
pub use directions::{
    certify_curvature, certify_descent, descent_direction, leftmost_eigenvalue, negative_curvature_direction, CurvatureDirection,
    DescentCertificate, DescentDirection, DescentStrategy,
};
pub use dynamic::{dynamic_solve, DynamicConfig, INNER_LOOP_CAP};
pub use model::{
    lipschitz_hat, model_reduction_curvature, model_reduction_descent, optimal_curvature_step,
    optimal_descent_step, optimal_stepsizes, LipschitzKind, LipschitzState, StepSizes,
};
pub use two_step::{two_step_solve, TwoStepConfig};

use crate::{Error, Result};

/// Constants certifying direction quality.
///
/// Curvature steps satisfy `d'Hd <= gamma * lambda * |d|^2 < 0`, `g'd <= 0`
/// and `|d| <= theta * |lambda|`. Descent steps satisfy
/// `-g's >= delta |s| |g|` and, for the two-step method,
/// `zeta |g| <= |s| <= eta |g|`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct DirectionCriteria {
    pub gamma: f64,
    pub theta: f64,
    pub delta: f64,
    pub zeta: f64,
    pub eta: f64,
    /// Leftmost eigenvalues in `[-curvature_threshold, 0)` count as zero.
    pub curvature_threshold: f64,
}

impl Default for DirectionCriteria {
    fn default() -> Self {
        DirectionCriteria { gamma: 1.0, theta: 1.0, delta: 1.0, zeta: 1.0, eta: 1.0, curvature_threshold: 1e-12 }
    }
}

impl DirectionCriteria {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(self.gamma) {
            return Err(Error::config("gamma must lie in (0, 1]"));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::config("theta must be positive"));
        }
        if !in_unit(self.delta) {
            return Err(Error::config("delta must lie in (0, 1]"));
        }
        if !in_unit(self.zeta) {
            return Err(Error::config("zeta must lie in (0, 1]"));
        }
        if !(self.eta >= 1.0 && self.eta.is_finite()) {
            return Err(Error::config("eta must be >= 1"));
        }
        if !(self.curvature_threshold >= 0.0) {
            return Err(Error::config("curvature threshold must be nonnegative"));
        }
        Ok(())
    }
}

/// Stopping rules. A run stops at an approximate second-order point when
/// `|g| <= grad_tol_rel * max(1, |g_1|)` and
/// `|min(lambda, 0)| <= curv_tol_rel * max(1, |min(lambda_1, 0)|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TerminationSpec {
    pub grad_tol_rel: f64,
    pub curv_tol_rel: f64,
    pub max_iterations: usize,
    /// Accepted displacements shorter than this stop the run.
    pub min_step_norm: f64,
    /// Absolute targets for iteration-count reporting; do not affect stopping.
    pub epsilon_g: Option<f64>,
    pub epsilon_h: Option<f64>,
}

impl Default for TerminationSpec {
    fn default() -> Self {
        TerminationSpec {
            grad_tol_rel: 1e-5,
            curv_tol_rel: 1e-5,
            max_iterations: 10_000,
            min_step_norm: 1e-16,
            epsilon_g: None,
            epsilon_h: None,
        }
    }
}

impl TerminationSpec {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.grad_tol_rel) || !pos(self.curv_tol_rel) || !pos(self.min_step_norm) {
            return Err(Error::config("termination tolerances must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be positive"));
        }
        if self.epsilon_g.is_some_and(|e| !pos(e)) || self.epsilon_h.is_some_and(|e| !pos(e)) {
            return Err(Error::config("census targets must be positive"));
        }
        Ok(())
    }

    pub(crate) fn tolerance_met(&self, gnorm: f64, lambda: f64, g1: f64, lambda1: f64) -> bool {
        gnorm <= self.grad_tol_rel * g1.max(1.0)
            && negative_part(lambda) <= self.curv_tol_rel * negative_part(lambda1).max(1.0)
    }
}

/// `|min(v, 0)|`
pub fn negative_part(v: f64) -> f64 {
    if v < 0.0 {
        -v
    } else {
        0.0
    }
}

/// Step taken in an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StepKind {
    Descent,
    Curvature,
    /// Curvature then descent (two-step method).
    Both,
    /// Terminal record only.
    None,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Descent => "descent",
            StepKind::Curvature => "curvature",
            StepKind::Both => "both",
            StepKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TerminationReason {
    /// Both directions vanished with `g = 0` and `lambda >= 0`.
    SecondOrderPoint,
    /// Both directions vanished with `g = 0` while curvature steps were
    /// disabled and `lambda < 0`.
    FirstOrderPoint,
    ToleranceMet,
    MaxIterations,
    TinyStep,
    /// The Lipschitz adjustment loop exceeded its pass cap.
    InnerLoopCap,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::SecondOrderPoint => "second_order_point",
            TerminationReason::FirstOrderPoint => "first_order_point",
            TerminationReason::ToleranceMet => "tolerance_met",
            TerminationReason::MaxIterations => "max_iterations",
            TerminationReason::TinyStep => "tiny_step",
            TerminationReason::InnerLoopCap => "inner_loop_cap",
        }
    }

    pub fn is_abnormal(self) -> bool {
        matches!(self, TerminationReason::InnerLoopCap)
    }
}

/// One iteration of a deterministic run, recorded at `x_k`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    /// Intermediate point after the curvature step (two-step method).
    pub x_hat: Option<Vec<f64>>,
    pub f: f64,
    pub gradient_norm: f64,
    /// Leftmost Hessian eigenvalue at `x_k`.
    pub lambda: f64,
    /// Descent direction (at `x_hat` for the two-step method).
    pub s: Vec<f64>,
    pub d: Vec<f64>,
    pub step: StepKind,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub model_reduction_s: Option<f64>,
    pub model_reduction_d: Option<f64>,
    /// Estimates in force when the step was accepted.
    pub lipschitz_gradient: f64,
    pub lipschitz_hessian: f64,
    /// Estimates at the start of the iteration.
    pub lipschitz_gradient_start: f64,
    pub lipschitz_hessian_start: f64,
    pub inner_loop_count: usize,
    /// Cumulative function evaluations after this iteration.
    pub feval_count: usize,
    /// `-g's / (|g| |s|)` of the descent direction, when nonzero.
    pub descent_cosine: Option<f64>,
    /// `|g(x_hat)|` (two-step method).
    pub gradient_norm_hat: Option<f64>,
    /// `f(x_{k+1})`, absent on the terminal record.
    pub f_next: Option<f64>,
}

/// Complete result of a deterministic run.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverReport {
    pub problem: String,
    pub method: String,
    pub records: Vec<IterationRecord>,
    pub termination_reason: TerminationReason,
    pub final_x: Vec<f64>,
    pub final_f: f64,
    pub final_gradient_norm: f64,
    pub final_lambda: f64,
    pub total_fevals: usize,
    /// Number of steps taken.
    pub total_iterations: usize,
    pub criteria: DirectionCriteria,
    pub termination: TerminationSpec,
    pub curvature_enabled: bool,
    pub lower_bound: Option<f64>,
}

impl SolverReport {
    /// Records of iterations that took a step.
    pub fn steps(&self) -> impl Iterator<Item = &IterationRecord> {
        self.records.iter().filter(|r| r.step != StepKind::None)
    }

    /// Whether any step used a nonzero curvature direction.
    pub fn used_negative_curvature(&self) -> bool {
        self.steps().any(|r| matches!(r.step, StepKind::Curvature | StepKind::Both) && !crate::linalg::is_zero(&r.d))
    }

    pub fn max_lipschitz_gradient(&self) -> f64 {
        self.steps().map(|r| r.lipschitz_gradient).fold(0.0, f64::max)
    }

    pub fn max_lipschitz_hessian(&self) -> f64 {
        self.steps().map(|r| r.lipschitz_hessian).fold(0.0, f64::max)
    }

    pub fn is_abnormal(&self) -> bool {
        self.termination_reason.is_abnormal()
    }
}
