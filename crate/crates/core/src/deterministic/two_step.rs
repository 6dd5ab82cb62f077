use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    descent_direction, negative_curvature_direction, DescentStrategy, DirectionCriteria, IterationRecord, SolverReport,
    StepKind, TerminationReason, TerminationSpec,
};
use crate::linalg::{is_zero, norm, step};
use crate::problem::Problem;
use crate::{Error, Result};

/// Fixed-stepsize two-step method. Convergence theory asks for
/// `alpha in (0, 2 delta zeta / (L eta^2))` and `beta in (0, 3 gamma / (sigma theta))`;
/// checking these against the problem is left to the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStepConfig {
    pub criteria: DirectionCriteria,
    pub strategy: DescentStrategy,
    pub alpha: f64,
    pub beta: f64,
    pub termination: TerminationSpec,
}

impl TwoStepConfig {
    pub fn new(alpha: f64, beta: f64) -> Self {
        TwoStepConfig {
            criteria: DirectionCriteria::default(),
            strategy: DescentStrategy::Steepest,
            alpha,
            beta,
            termination: TerminationSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.criteria.validate()?;
        self.termination.validate()?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("two-step stepsizes must be positive"));
        }
        Ok(())
    }
}

/// Per iteration: curvature step `x_hat = x + beta d`, then descent step
/// `x_next = x_hat + alpha s_hat` with `s_hat` computed at `x_hat`.
pub fn two_step_solve(problem: &Problem, x0: &[f64], config: &TwoStepConfig) -> Result<SolverReport> {
    config.validate()?;
    let criteria = &config.criteria;
    let fevals0 = problem.fevals();
    let mut x = x0.to_vec();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut first: Option<(f64, f64)> = None;
    let mut tiny = false;

    let reason = loop {
        let f = problem.evaluate(&x)?;
        let g = problem.gradient(&x)?;
        let h = problem.hessian(&x)?;
        if let Some(last) = records.last_mut() {
            last.f_next = Some(f);
        }
        let curvature = negative_curvature_direction(&h, &g, criteria)?;
        let lambda = curvature.lambda;
        let gnorm = norm(&g);
        let (g1, lambda1) = *first.get_or_insert((gnorm, lambda));
        let k = records.len() + 1;
        let terminal = |reason: TerminationReason, records: &mut Vec<IterationRecord>| {
            records.push(IterationRecord {
                k,
                x: x.clone(),
                x_hat: None,
                f,
                gradient_norm: gnorm,
                lambda,
                s: vec![0.0; x.len()],
                d: vec![0.0; x.len()],
                step: StepKind::None,
                alpha: None,
                beta: None,
                model_reduction_s: None,
                model_reduction_d: None,
                lipschitz_gradient: 0.0,
                lipschitz_hessian: 0.0,
                lipschitz_gradient_start: 0.0,
                lipschitz_hessian_start: 0.0,
                inner_loop_count: 0,
                feval_count: problem.fevals() - fevals0,
                descent_cosine: None,
                gradient_norm_hat: None,
                f_next: None,
            });
            reason
        };
        if tiny {
            break terminal(TerminationReason::TinyStep, &mut records);
        }

        let d = curvature.direction;
        let has_d = !is_zero(&d);
        let (x_hat, g_hat, h_hat) = if has_d {
            let xh = step(&x, config.beta, &d);
            let gh = problem.gradient(&xh)?;
            let hh = match config.strategy {
                DescentStrategy::Steepest => None,
                DescentStrategy::ModifiedNewton { .. } => Some(problem.hessian(&xh)?),
            };
            (xh, gh, hh)
        } else {
            (x.clone(), g.clone(), None)
        };
        let (s_hat, cosine) = if is_zero(&g_hat) {
            (vec![0.0; x.len()], None)
        } else {
            let hh = h_hat.as_ref().unwrap_or(&h);
            let dir = descent_direction(config.strategy, &g_hat, hh, criteria)?;
            (dir.direction, Some(dir.certificate.cosine))
        };

        if !has_d && is_zero(&s_hat) {
            break terminal(TerminationReason::SecondOrderPoint, &mut records);
        }
        if config.termination.tolerance_met(gnorm, lambda, g1, lambda1) {
            break terminal(TerminationReason::ToleranceMet, &mut records);
        }
        if records.len() >= config.termination.max_iterations {
            break terminal(TerminationReason::MaxIterations, &mut records);
        }

        let x_next = step(&x_hat, config.alpha, &s_hat);
        let displacement: Vec<f64> = x_next.iter().zip(&x).map(|(a, b)| a - b).collect();
        tiny = norm(&displacement) < config.termination.min_step_norm;
        let kind = if has_d { StepKind::Both } else { StepKind::Descent };
        records.push(IterationRecord {
            k,
            x: core::mem::replace(&mut x, x_next),
            x_hat: has_d.then_some(x_hat),
            f,
            gradient_norm: gnorm,
            lambda,
            gradient_norm_hat: Some(norm(&g_hat)),
            s: s_hat,
            d,
            step: kind,
            alpha: Some(config.alpha),
            beta: has_d.then_some(config.beta),
            model_reduction_s: None,
            model_reduction_d: None,
            lipschitz_gradient: 0.0,
            lipschitz_hessian: 0.0,
            lipschitz_gradient_start: 0.0,
            lipschitz_hessian_start: 0.0,
            inner_loop_count: 1,
            feval_count: problem.fevals() - fevals0,
            descent_cosine: cosine,
            f_next: None,
        });
    };

    let last = records.last().expect("terminal record");
    Ok(SolverReport {
        problem: problem.name(),
        method: format!("two_step({})", config.strategy.name()),
        termination_reason: reason,
        final_x: last.x.clone(),
        final_f: last.f,
        final_gradient_norm: last.gradient_norm,
        final_lambda: last.lambda,
        total_fevals: problem.fevals() - fevals0,
        total_iterations: records.len() - 1,
        criteria: config.criteria,
        termination: config.termination,
        curvature_enabled: true,
        lower_bound: problem.lower_bound(),
        records,
    })
}
