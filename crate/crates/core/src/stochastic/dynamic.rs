use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{StochasticIterationRecord, StochasticReport};
use crate::linalg::{is_zero, norm, scaled, step, truncated_cg};
use crate::problem::{FiniteSum, StochasticOracle};
use crate::{Error, Result};

/// CG iterations per step.
const CG_ITERATIONS: usize = 10;

// Norms within this relative margin of a limit count as satisfying it, so
// a second safeguard pass is a no-op.
const LIMIT_SLACK: f64 = 1e-12;

/// Step-control constants of the stochastic dynamic method.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SafeguardConfig {
    /// `|s| <= max_s_norm`
    pub max_s_norm: f64,
    /// `|beta d| <= max_ratio_d_to_s |alpha s|`
    pub max_ratio_d_to_s: f64,
    /// Growth factor of an estimate after a predicted increase.
    pub inflate_factor: f64,
    pub l_init: f64,
    pub sigma_init: f64,
}

impl Default for SafeguardConfig {
    fn default() -> Self {
        SafeguardConfig { max_s_norm: 10.0, max_ratio_d_to_s: 0.2, inflate_factor: 1.2, l_init: 80.0, sigma_init: 100.0 }
    }
}

impl SafeguardConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if [self.max_s_norm, self.max_ratio_d_to_s, self.inflate_factor, self.l_init, self.sigma_init]
            .into_iter()
            .all(pos)
        {
            Ok(())
        } else {
            Err(Error::config("safeguard constants must be positive"))
        }
    }
}

/// Scales `s` down to `|s| <= max_s_norm`, then `d` down to
/// `|beta d| <= max_ratio_d_to_s |alpha s|`. Idempotent.
pub fn apply_safeguards(s: &[f64], d: &[f64], alpha: f64, beta: f64, config: &SafeguardConfig) -> (Vec<f64>, Vec<f64>) {
    let sn = norm(s);
    let s = if sn > config.max_s_norm * (1.0 + LIMIT_SLACK) { scaled(config.max_s_norm / sn, s) } else { s.to_vec() };
    let dn = beta * norm(d);
    let limit = config.max_ratio_d_to_s * alpha * norm(&s);
    let d = if dn > limit * (1.0 + LIMIT_SLACK) {
        if limit > 0.0 {
            scaled(limit / dn, d)
        } else {
            vec![0.0; d.len()]
        }
    } else {
        d.to_vec()
    };
    (s, d)
}

/// Stochastic dynamic method. Each iteration solves `H_k s = -g_k` by at most
/// ten CG iterations, keeping any nonpositive-curvature direction as `d`;
/// always steps `x_hat = x + s / L`; grows `L` when the batch value
/// increased; then tries `x_hat + d / sigma`, reverting it and growing
/// `sigma` when the batch value increased. Estimates never decrease.
///
/// All value estimates of an iteration share its gradient batch.
pub fn dynamic_stochastic_solve<S: FiniteSum + ?Sized>(
    oracle: &mut StochasticOracle<'_, S>,
    safeguards: &SafeguardConfig,
    x0: &[f64],
    iterations: u64,
    use_curvature: bool,
    track_full_loss: bool,
) -> Result<StochasticReport> {
    safeguards.validate()?;
    let source = oracle.source();
    let all = source.all_indices();
    let mut x = x0.to_vec();
    let (mut l, mut sigma) = (safeguards.l_init, safeguards.sigma_init);
    let mut records = Vec::with_capacity(iterations as usize);

    for k in 1..=iterations {
        oracle.begin_iteration(k);
        let est = oracle.sample_estimates(&x);
        let cg = truncated_cg(&est.hessian, &est.gradient, CG_ITERATIONS);
        let s_raw = if is_zero(&est.gradient) { vec![0.0; x.len()] } else { cg.solution };
        let d_raw = match cg.curvature_direction {
            Some(p) if use_curvature => p,
            _ => vec![0.0; x.len()],
        };
        let (alpha, beta) = (1.0 / l, 1.0 / sigma);
        let (s, d) = apply_safeguards(&s_raw, &d_raw, alpha, beta, safeguards);

        let mut record = StochasticIterationRecord {
            k,
            x: x.clone(),
            alpha,
            beta,
            omega: None,
            s_norm: norm(&s),
            d_norm: norm(&d),
            lambda_estimate: None,
            cg_status: Some(cg.status),
            value_before: Some(est.value),
            value_after_descent: None,
            value_after_curvature: None,
            lipschitz_gradient: Some(l),
            lipschitz_hessian: Some(sigma),
            reverted_curvature_step: false,
            exact_gradient_norm: None,
            full_loss: track_full_loss.then(|| source.mean_value(&x, &all)),
        };

        let x_hat = step(&x, alpha, &s);
        let f_hat = oracle.batch_value(&x_hat, &est.gradient_batch);
        record.value_after_descent = Some(f_hat);
        if f_hat > est.value {
            l *= safeguards.inflate_factor;
        }
        let mut x_next = x_hat;
        if !is_zero(&d) {
            let x_trial = step(&x_next, beta, &d);
            let f_trial = oracle.batch_value(&x_trial, &est.gradient_batch);
            record.value_after_curvature = Some(f_trial);
            if f_trial > f_hat {
                sigma *= safeguards.inflate_factor;
                record.reverted_curvature_step = true;
            } else {
                x_next = x_trial;
            }
        }
        if !crate::linalg::all_finite(&x_next) {
            return Err(Error::EvaluationFailure { quantity: "iterate", x });
        }
        records.push(record);
        x = x_next;
    }

    let final_loss = source.mean_value(&x, &all);
    let dirs = if use_curvature { "s,d" } else { "s" };
    Ok(StochasticReport {
        problem: source.name().to_string(),
        method: format!("stochastic_dynamic({}; batch {})", dirs, oracle.batch_size()),
        seed: oracle.seed(),
        batch_size: oracle.batch_size(),
        records,
        final_x: x,
        final_loss,
        curvature_enabled: use_curvature,
    })
}
