//! Stochastic methods over a [`StochasticOracle`](crate::problem::StochasticOracle):
//! the two-step method with curvature noise and the CG-driven dynamic method.

mod dynamic;
mod moments;
mod two_step;

use alloc::string::String;
use alloc::vec::Vec;

pub use dynamic::{apply_safeguards, dynamic_stochastic_solve, SafeguardConfig};
pub use moments::{expected_descent_check, measure_moments, DescentCheck, MomentBounds};
pub use two_step::{curvature_noise_step, noise_directions, two_step_stochastic_solve, NoiseDirections};

use crate::deterministic::DirectionCriteria;
use crate::linalg::CgStatus;
use crate::{Error, Result};

/// Descent stepsize rule `alpha_k`, `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StepSchedule {
    Constant(f64),
    /// `a / (b + k)`: nonsummable with summable squares.
    Diminishing { a: f64, b: f64 },
}

impl StepSchedule {
    pub fn at(&self, k: u64) -> f64 {
        match *self {
            StepSchedule::Constant(v) => v,
            StepSchedule::Diminishing { a, b } => a / (b + k as f64),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSchedule::Constant(v) => v > 0.0 && v.is_finite(),
            StepSchedule::Diminishing { a, b } => a > 0.0 && a.is_finite() && b > -1.0 && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config("stepsize schedule must produce positive finite steps"))
        }
    }
}

/// Curvature stepsize rule `beta_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BetaSchedule {
    Constant(f64),
    /// `beta_k = chi alpha_k`
    Proportional(f64),
}

impl BetaSchedule {
    pub fn at(&self, alpha: f64) -> f64 {
        match *self {
            BetaSchedule::Constant(v) => v,
            BetaSchedule::Proportional(chi) => chi * alpha,
        }
    }
}

/// Configuration of the two-step method with curvature noise.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StochasticStepConfig {
    pub alpha_schedule: StepSchedule,
    pub beta_schedule: BetaSchedule,
    /// Documented second-moment constants, used for admissibility checks.
    pub moment_bounds: Option<MomentBounds>,
    /// Gradient Lipschitz constant of the full objective, when known.
    pub lipschitz: Option<f64>,
    pub criteria: DirectionCriteria,
}

impl StochasticStepConfig {
    /// `alpha_k = beta_k = alpha`
    pub fn constant(alpha: f64) -> Self {
        StochasticStepConfig {
            alpha_schedule: StepSchedule::Constant(alpha),
            beta_schedule: BetaSchedule::Proportional(1.0),
            moment_bounds: None,
            lipschitz: None,
            criteria: DirectionCriteria::default(),
        }
    }

    /// Largest admissible constant stepsize `delta / (2 L max(M_s2, M_d2))`.
    pub fn constant_step_cap(delta: f64, lipschitz: f64, moments: &MomentBounds) -> f64 {
        delta / (2.0 * lipschitz * moments.s2.max(moments.d2))
    }

    pub fn alpha(&self, k: u64) -> f64 {
        self.alpha_schedule.at(k)
    }

    pub fn beta(&self, k: u64) -> f64 {
        self.beta_schedule.at(self.alpha(k))
    }

    pub fn validate(&self) -> Result<()> {
        self.criteria.validate()?;
        self.alpha_schedule.validate()?;
        let beta_ok = match self.beta_schedule {
            BetaSchedule::Constant(v) | BetaSchedule::Proportional(v) => v >= 0.0 && v.is_finite(),
        };
        if !beta_ok {
            return Err(Error::config("beta schedule must be nonnegative and finite"));
        }
        if let (StepSchedule::Constant(alpha), Some(l), Some(m)) = (self.alpha_schedule, self.lipschitz, self.moment_bounds) {
            let cap = Self::constant_step_cap(self.criteria.delta, l, &m);
            if alpha > cap {
                return Err(Error::ConditionViolation { condition: "constant stepsize above admissible cap", value: alpha - cap });
            }
        }
        Ok(())
    }
}

/// One iteration of a stochastic run, recorded at `x_k`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StochasticIterationRecord {
    pub k: u64,
    pub x: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Curvature noise multiplier in `[-1, 1]` (two-step method).
    pub omega: Option<f64>,
    /// Norms of the directions as stepped (after safeguards).
    pub s_norm: f64,
    pub d_norm: f64,
    /// Leftmost eigenvalue of the Hessian estimate (two-step method).
    pub lambda_estimate: Option<f64>,
    pub cg_status: Option<CgStatus>,
    /// Batch value estimates at `x_k`, after the descent step, and after the
    /// curvature step (dynamic method).
    pub value_before: Option<f64>,
    pub value_after_descent: Option<f64>,
    pub value_after_curvature: Option<f64>,
    pub lipschitz_gradient: Option<f64>,
    pub lipschitz_hessian: Option<f64>,
    pub reverted_curvature_step: bool,
    /// `|grad f(x_k)|` of the full objective (test mode).
    pub exact_gradient_norm: Option<f64>,
    /// `f(x_k)` of the full objective (test mode).
    pub full_loss: Option<f64>,
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StochasticReport {
    pub problem: String,
    pub method: String,
    pub seed: u64,
    pub batch_size: usize,
    pub records: Vec<StochasticIterationRecord>,
    pub final_x: Vec<f64>,
    /// Full-objective value at `final_x`.
    pub final_loss: f64,
    pub curvature_enabled: bool,
}

impl StochasticReport {
    /// `(1/K) sum_k |grad f(x_k)|^2` when exact gradients were tracked.
    pub fn mean_squared_gradient(&self) -> Option<f64> {
        let mut total = 0.0;
        for r in &self.records {
            let g = r.exact_gradient_norm?;
            total += g * g;
        }
        (!self.records.is_empty()).then(|| total / self.records.len() as f64)
    }

    pub fn used_negative_curvature(&self) -> bool {
        self.records.iter().any(|r| r.d_norm > 0.0 && !r.reverted_curvature_step)
    }

    pub fn total_iterations(&self) -> usize {
        self.records.len()
    }
}
