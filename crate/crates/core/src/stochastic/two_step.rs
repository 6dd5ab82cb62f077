use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{StochasticIterationRecord, StochasticReport, StochasticStepConfig};
use crate::deterministic::{certify_curvature, DirectionCriteria};
use crate::linalg::{dot, leftmost_eigenpair, norm, SymMatrix};
use crate::problem::{FiniteSum, StochasticOracle};
use crate::{Error, Result};

/// Directions built from one gradient estimate and one Hessian estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDirections {
    /// `-g_est`
    pub s: Vec<f64>,
    /// Leftmost eigenvector of `h_est` scaled to `|d| = |s|` and oriented so
    /// `g_est'd <= 0`; zero when the leftmost eigenvalue is not negative.
    pub d: Vec<f64>,
    pub lambda: f64,
}

pub fn noise_directions(g_est: &[f64], h_est: &SymMatrix, criteria: &DirectionCriteria) -> Result<NoiseDirections> {
    if g_est.len() != h_est.dim() {
        return Err(Error::DimensionMismatch { expected: h_est.dim(), found: g_est.len() });
    }
    let s: Vec<f64> = g_est.iter().map(|v| -v).collect();
    let tolerance = 1e-9 * h_est.frobenius().max(1.0);
    let pair = leftmost_eigenpair(h_est, tolerance)?;
    let lambda = pair.leftmost_value;
    let sn = norm(&s);
    if lambda >= -criteria.curvature_threshold || sn == 0.0 {
        return Ok(NoiseDirections { d: vec![0.0; s.len()], s, lambda });
    }
    let scale = if dot(g_est, &pair.leftmost_vector) > 0.0 { -sn } else { sn };
    let d: Vec<f64> = pair.leftmost_vector.iter().map(|v| scale * v).collect();
    // Only the curvature part of the certificate applies; the length is tied to |s|.
    let relaxed = DirectionCriteria { theta: f64::INFINITY, ..*criteria };
    certify_curvature(h_est, g_est, &d, lambda, &relaxed)?;
    Ok(NoiseDirections { s, d, lambda })
}

/// One step `x + alpha s + beta omega d` with `s`, `d` from independent
/// gradient and Hessian batches and `omega` uniform on `[-1, 1]`.
pub fn curvature_noise_step<S: FiniteSum + ?Sized>(
    x: &[f64],
    oracle: &mut StochasticOracle<'_, S>,
    criteria: &DirectionCriteria,
    alpha: f64,
    beta: f64,
) -> Result<(Vec<f64>, StochasticIterationRecord)> {
    if !(alpha >= 0.0) || !(beta >= 0.0) {
        return Err(Error::config("stepsizes must be nonnegative"));
    }
    let est = oracle.sample_estimates(x);
    let dirs = noise_directions(&est.gradient, &est.hessian, criteria)?;
    let omega = oracle.draw_omega();
    let x_next: Vec<f64> = x
        .iter()
        .zip(&dirs.s)
        .zip(&dirs.d)
        .map(|((xi, si), di)| xi + alpha * si + beta * omega * di)
        .collect();
    if !crate::linalg::all_finite(&x_next) {
        return Err(Error::EvaluationFailure { quantity: "iterate", x: x.to_vec() });
    }
    let record = StochasticIterationRecord {
        k: oracle.iteration(),
        x: x.to_vec(),
        alpha,
        beta,
        omega: Some(omega),
        s_norm: norm(&dirs.s),
        d_norm: norm(&dirs.d),
        lambda_estimate: Some(dirs.lambda),
        cg_status: None,
        value_before: Some(est.value),
        value_after_descent: None,
        value_after_curvature: None,
        lipschitz_gradient: None,
        lipschitz_hessian: None,
        reverted_curvature_step: false,
        exact_gradient_norm: None,
        full_loss: None,
    };
    Ok((x_next, record))
}

/// `iterations` steps of [`curvature_noise_step`] under `config`'s
/// schedules. With `track_exact`, records the full gradient norm and value
/// at every iterate.
pub fn two_step_stochastic_solve<S: FiniteSum + ?Sized>(
    oracle: &mut StochasticOracle<'_, S>,
    config: &StochasticStepConfig,
    x0: &[f64],
    iterations: u64,
    track_exact: bool,
) -> Result<StochasticReport> {
    config.validate()?;
    let mut x = x0.to_vec();
    let mut records = Vec::with_capacity(iterations as usize);
    for k in 1..=iterations {
        oracle.begin_iteration(k);
        let exact = track_exact.then(|| oracle.exact_value_gradient(&x));
        let (x_next, mut record) = curvature_noise_step(&x, oracle, &config.criteria, config.alpha(k), config.beta(k))?;
        if let Some((f, g)) = exact {
            record.full_loss = Some(f);
            record.exact_gradient_norm = Some(norm(&g));
        }
        records.push(record);
        x = x_next;
    }
    let final_loss = oracle.exact_value_gradient(&x).0;
    Ok(StochasticReport {
        problem: oracle.source().name().to_string(),
        method: format!("stochastic_two_step(batch {})", oracle.batch_size()),
        seed: oracle.seed(),
        batch_size: oracle.batch_size(),
        records,
        final_x: x,
        final_loss,
        curvature_enabled: true,
    })
}
