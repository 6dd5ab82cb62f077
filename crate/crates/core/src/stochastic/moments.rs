use alloc::vec::Vec;

use super::two_step::{curvature_noise_step, noise_directions};
use crate::deterministic::DirectionCriteria;
use crate::linalg::dot;
use crate::problem::{FiniteSum, StochasticOracle};
use crate::{math, Result};

/// Second-moment constants: `E|s|^2 <= s1 + s2 |grad f|^2` and
/// `E|d|^2 <= d1 + d2 |grad f|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentBounds {
    pub s1: f64,
    pub s2: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Estimates moment constants at `points` with the slope fixed to `slope`
/// (> 1). At each point the mean of `|s|^2` over `draws` oracle draws, plus
/// three standard errors, minus `slope |grad f|^2` gives a candidate
/// intercept; the largest candidate (at least zero) is kept.
pub fn measure_moments<S: FiniteSum + ?Sized>(
    source: &S,
    points: &[Vec<f64>],
    batch_size: usize,
    draws: u64,
    seed: u64,
    criteria: &DirectionCriteria,
    slope: f64,
) -> Result<MomentBounds> {
    let mut oracle = StochasticOracle::new(source, batch_size, seed)?;
    let (mut s1, mut d1) = (0.0f64, 0.0f64);
    for x in points {
        let (_, g) = oracle.exact_value_gradient(x);
        let gg = dot(&g, &g);
        let mut s_stats = Welford::default();
        let mut d_stats = Welford::default();
        for r in 0..draws {
            oracle.begin_iteration(r);
            let est = oracle.sample_estimates(x);
            let dirs = noise_directions(&est.gradient, &est.hessian, criteria)?;
            s_stats.push(dot(&dirs.s, &dirs.s));
            d_stats.push(dot(&dirs.d, &dirs.d));
        }
        s1 = s1.max(s_stats.mean + 3.0 * s_stats.standard_error() - slope * gg);
        d1 = d1.max(d_stats.mean + 3.0 * d_stats.standard_error() - slope * gg);
    }
    Ok(MomentBounds { s1, s2: slope, d1, d2: slope })
}

/// Monte Carlo check of the expected one-step change of `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentCheck {
    /// Sample mean of `f(x_next) - f(x)`.
    pub empirical_decrease: f64,
    pub standard_error: f64,
    /// `-(delta a - L s2 a^2 / 2 - L d2 b^2 / 6) |grad f|^2 + L s1 a^2 / 2 + L d1 b^2 / 6`
    pub bound: f64,
}

impl DescentCheck {
    /// Bound holds within `sigmas` standard errors.
    pub fn holds(&self, sigmas: f64) -> bool {
        self.empirical_decrease <= self.bound + sigmas * self.standard_error
    }
}

/// Replicates one step of the two-step method with curvature noise from
/// `x` and compares the mean change of the full objective with its bound.
#[allow(clippy::too_many_arguments)]
pub fn expected_descent_check<S: FiniteSum + ?Sized>(
    source: &S,
    x: &[f64],
    batch_size: usize,
    alpha: f64,
    beta: f64,
    lipschitz: f64,
    moments: &MomentBounds,
    criteria: &DirectionCriteria,
    replications: u64,
    seed: u64,
) -> Result<DescentCheck> {
    let mut oracle = StochasticOracle::new(source, batch_size, seed)?;
    let all = source.all_indices();
    let (f0, g) = source.mean_value_gradient(x, &all);
    let gg = dot(&g, &g);
    let mut stats = Welford::default();
    for r in 0..replications {
        oracle.begin_iteration(r);
        let (x_next, _) = curvature_noise_step(x, &mut oracle, criteria, alpha, beta)?;
        stats.push(source.mean_value(&x_next, &all) - f0);
    }
    let m = moments;
    let l = lipschitz;
    let bound = -(criteria.delta * alpha - 0.5 * l * m.s2 * alpha * alpha - l * m.d2 * beta * beta / 6.0) * gg
        + 0.5 * l * m.s1 * alpha * alpha
        + l * m.d1 * beta * beta / 6.0;
    Ok(DescentCheck { empirical_decrease: stats.mean, standard_error: stats.standard_error(), bound })
}

/// Streaming mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            math::sqrt(self.variance() / self.count as f64)
        }
    }
}
