use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    descent_direction, leftmost_eigenvalue, lipschitz_hat, model_reduction_curvature, model_reduction_descent, negative_curvature_direction,
    optimal_stepsizes, DescentStrategy, DirectionCriteria, IterationRecord, LipschitzKind, LipschitzState, SolverReport,
    StepKind, TerminationReason, TerminationSpec,
};
use crate::linalg::{is_zero, norm, step};
use crate::problem::Problem;
use crate::{Error, Result};

/// Passes of the Lipschitz adjustment loop allowed per iteration.
pub const INNER_LOOP_CAP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicConfig {
    pub criteria: DirectionCriteria,
    pub strategy: DescentStrategy,
    pub lipschitz: LipschitzState,
    pub termination: TerminationSpec,
    /// `false` suppresses curvature steps (descent-only twin).
    pub use_curvature: bool,
    pub inner_loop_cap: usize,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        DynamicConfig::new(DescentStrategy::Steepest, true)
    }
}

impl DynamicConfig {
    /// Defaults for `strategy`. The descent cosine bound is set to what the
    /// strategy guarantees.
    pub fn new(strategy: DescentStrategy, use_curvature: bool) -> Self {
        DynamicConfig {
            criteria: DirectionCriteria { delta: strategy.guaranteed_cosine(), ..DirectionCriteria::default() },
            strategy,
            lipschitz: LipschitzState::default(),
            termination: TerminationSpec::default(),
            use_curvature,
            inner_loop_cap: INNER_LOOP_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.criteria.validate()?;
        self.lipschitz.validate()?;
        self.termination.validate()?;
        if self.inner_loop_cap == 0 {
            return Err(Error::config("inner loop cap must be positive"));
        }
        if let DescentStrategy::ModifiedNewton { condition_cap } = self.strategy {
            if !(condition_cap > 1.0) {
                return Err(Error::config("condition cap must exceed 1"));
            }
        }
        Ok(())
    }

    pub fn method_name(&self) -> alloc::string::String {
        let dirs = if self.use_curvature { "s,d" } else { "s" };
        format!("dynamic({}; {})", self.strategy.name(), dirs)
    }
}

/// Dynamic method: each iteration compares the optimal reductions of a
/// quadratic model along `s` and a cubic model along `d`, tries the better
/// step, and adjusts the Lipschitz estimate of the tried model until the
/// observed decrease matches the model.
pub fn dynamic_solve(problem: &Problem, x0: &[f64], config: &DynamicConfig) -> Result<SolverReport> {
    config.validate()?;
    let criteria = &config.criteria;
    let fevals0 = problem.fevals();
    let mut state = config.lipschitz;
    let mut x = x0.to_vec();
    let mut f = problem.evaluate(&x)?;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut first: Option<(f64, f64)> = None;
    let mut tiny = false;
    let n = x.len();

    let reason = loop {
        let g = problem.gradient(&x)?;
        let h = problem.hessian(&x)?;
        let (d, lambda) = if config.use_curvature {
            let c = negative_curvature_direction(&h, &g, criteria)?;
            (c.direction, c.lambda)
        } else {
            (vec![0.0; n], leftmost_eigenvalue(&h)?)
        };
        let gnorm = norm(&g);
        let (g1, lambda1) = *first.get_or_insert((gnorm, lambda));
        let (s, cosine) = if is_zero(&g) {
            (vec![0.0; n], None)
        } else {
            let dir = descent_direction(config.strategy, &g, &h, criteria)?;
            (dir.direction, Some(dir.certificate.cosine))
        };

        let mut record = IterationRecord {
            k: records.len() + 1,
            x: x.clone(),
            x_hat: None,
            f,
            gradient_norm: gnorm,
            lambda,
            s,
            d,
            step: StepKind::None,
            alpha: None,
            beta: None,
            model_reduction_s: None,
            model_reduction_d: None,
            lipschitz_gradient: state.gradient,
            lipschitz_hessian: state.hessian,
            lipschitz_gradient_start: state.gradient,
            lipschitz_hessian_start: state.hessian,
            inner_loop_count: 0,
            feval_count: problem.fevals() - fevals0,
            descent_cosine: cosine,
            gradient_norm_hat: None,
            f_next: None,
        };

        let stop = if tiny {
            Some(TerminationReason::TinyStep)
        } else if is_zero(&record.s) && is_zero(&record.d) {
            Some(if lambda >= -criteria.curvature_threshold {
                TerminationReason::SecondOrderPoint
            } else {
                TerminationReason::FirstOrderPoint
            })
        } else if config.termination.tolerance_met(gnorm, lambda, g1, lambda1) {
            Some(TerminationReason::ToleranceMet)
        } else if records.len() >= config.termination.max_iterations {
            Some(TerminationReason::MaxIterations)
        } else {
            None
        };
        if let Some(reason) = stop {
            records.push(record);
            break reason;
        }

        let (s, d) = (&record.s, &record.d);
        let mut accepted: Option<(Vec<f64>, f64, f64)> = None;
        while accepted.is_none() {
            if record.inner_loop_count >= config.inner_loop_cap {
                break;
            }
            record.inner_loop_count += 1;
            let sizes = optimal_stepsizes(&g, s, d, &h, &state)?;
            let ms = sizes.alpha.map(|a| model_reduction_descent(&g, s, state.gradient, a));
            let md = sizes.beta.map(|b| model_reduction_curvature(&g, d, &h, state.hessian, b));
            let descent = match (ms, md) {
                (Some(a), Some(b)) => a >= b,
                (Some(_), None) => true,
                (None, _) => false,
            };
            record.alpha = sizes.alpha;
            record.beta = sizes.beta;
            record.model_reduction_s = ms;
            record.model_reduction_d = md;
            let (kind, size, dir, m) = if descent {
                (LipschitzKind::Gradient, sizes.alpha.unwrap_or(0.0), s, ms.unwrap_or(0.0))
            } else {
                (LipschitzKind::Hessian, sizes.beta.unwrap_or(0.0), d, md.unwrap_or(0.0))
            };
            let trial = step(&x, size, dir);
            // A trial point where f is not finite fails the decrease test.
            let f_trial = match problem.evaluate(&trial) {
                Ok(v) => v,
                Err(Error::EvaluationFailure { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            let hat = lipschitz_hat(kind, f_trial, f, m, size, norm(dir), state.get(kind));
            if f_trial <= f - m {
                record.step = if descent { StepKind::Descent } else { StepKind::Curvature };
                record.lipschitz_gradient = state.gradient;
                record.lipschitz_hessian = state.hessian;
                state.relax(kind, hat);
                accepted = Some((trial, f_trial, size * norm(dir)));
            } else {
                state.inflate(kind, hat);
            }
        }

        record.feval_count = problem.fevals() - fevals0;
        match accepted {
            Some((x_next, f_next, displacement)) => {
                record.f_next = Some(f_next);
                records.push(record);
                x = x_next;
                f = f_next;
                tiny = displacement < config.termination.min_step_norm;
            }
            None => {
                records.push(record);
                break TerminationReason::InnerLoopCap;
            }
        }
    };

    let last = records.last().expect("terminal record");
    Ok(SolverReport {
        problem: problem.name(),
        method: config.method_name(),
        termination_reason: reason,
        final_x: last.x.clone(),
        final_f: last.f,
        final_gradient_norm: last.gradient_norm,
        final_lambda: last.lambda,
        total_fevals: problem.fevals() - fevals0,
        total_iterations: records.iter().filter(|r| r.step != StepKind::None).count(),
        criteria: config.criteria,
        termination: config.termination,
        curvature_enabled: config.use_curvature,
        lower_bound: problem.lower_bound(),
        records,
    })
}
