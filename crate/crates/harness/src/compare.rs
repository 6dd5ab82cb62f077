use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::report::RunReport;

/// `(a - b) / max(|a|, |b|, 1)`. Lies in `[-2, 2]`, and in `[-1, 1]` when
/// `a` and `b` have the same sign.
pub fn relative_measure(a: f64, b: f64) -> f64 {
    (a - b) / a.abs().max(b.abs()).max(1.0)
}

/// Descent-only versus curvature-enabled run on one problem. Positive
/// measures favour the curvature-enabled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub problem: String,
    /// Descent strategy and starting point index, for campaign rows.
    pub strategy: Option<String>,
    pub start: Option<usize>,
    pub f_measure: f64,
    pub iter_measure: f64,
    pub feval_measure: f64,
    pub used_negative_curvature: bool,
}

pub fn compare(descent_only: &RunReport, with_curvature: &RunReport) -> Result<ComparisonRow> {
    if descent_only.problem() != with_curvature.problem() {
        return Err(HarnessError::usage(format!(
            "reports are for different problems: `{}` and `{}`",
            descent_only.problem(),
            with_curvature.problem()
        )));
    }
    let count = |v: usize| v as f64;
    let fevals = |r: &RunReport| r.fevals().map_or(0.0, count);
    Ok(ComparisonRow {
        problem: descent_only.problem().to_string(),
        strategy: None,
        start: None,
        f_measure: relative_measure(descent_only.final_value(), with_curvature.final_value()),
        iter_measure: relative_measure(count(descent_only.iterations()), count(with_curvature.iterations())),
        feval_measure: relative_measure(fevals(descent_only), fevals(with_curvature)),
        used_negative_curvature: with_curvature.used_negative_curvature(),
    })
}
