use std::io::Write;
use std::path::{Path, PathBuf};

use curvopt_core::deterministic::{dynamic_solve, two_step_solve, SolverReport};
use curvopt_core::problem::StochasticOracle;
use curvopt_core::stochastic::{dynamic_stochastic_solve, two_step_stochastic_solve, StochasticReport};
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig, SolvePlan, Target};
use crate::error::{HarnessError, Result};

/// Trace columns, in file order.
pub const TRACE_COLUMNS: [&str; 10] = ["k", "f", "gnorm", "lambda", "alpha", "beta", "branch", "Lk", "sigmak", "fevals"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunReport {
    Deterministic(SolverReport),
    Stochastic(StochasticReport),
}

impl RunReport {
    pub fn problem(&self) -> &str {
        match self {
            RunReport::Deterministic(r) => &r.problem,
            RunReport::Stochastic(r) => &r.problem,
        }
    }

    pub fn method(&self) -> &str {
        match self {
            RunReport::Deterministic(r) => &r.method,
            RunReport::Stochastic(r) => &r.method,
        }
    }

    /// Final objective value (full objective for stochastic runs).
    pub fn final_value(&self) -> f64 {
        match self {
            RunReport::Deterministic(r) => r.final_f,
            RunReport::Stochastic(r) => r.final_loss,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            RunReport::Deterministic(r) => r.total_iterations,
            RunReport::Stochastic(r) => r.total_iterations(),
        }
    }

    /// Objective evaluations; stochastic runs do not count them.
    pub fn fevals(&self) -> Option<usize> {
        match self {
            RunReport::Deterministic(r) => Some(r.total_fevals),
            RunReport::Stochastic(_) => None,
        }
    }

    pub fn used_negative_curvature(&self) -> bool {
        match self {
            RunReport::Deterministic(r) => r.used_negative_curvature(),
            RunReport::Stochastic(r) => r.used_negative_curvature(),
        }
    }

    pub fn is_abnormal(&self) -> bool {
        match self {
            RunReport::Deterministic(r) => r.is_abnormal(),
            RunReport::Stochastic(_) => false,
        }
    }

    /// Why the run stopped.
    pub fn outcome(&self) -> &'static str {
        match self {
            RunReport::Deterministic(r) => r.termination_reason.as_str(),
            RunReport::Stochastic(_) => "iteration_budget",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| HarnessError::Format { context: "report".into(), message: e.to_string() })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::usage(format!("report: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|e| HarnessError::usage(format!("{}: {e}", path.display())))
    }

    /// Writes the per-iteration trace with [`TRACE_COLUMNS`]. Reals use
    /// 17 significant digits; absent values are empty cells.
    pub fn write_trace(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| HarnessError::Format { context: "trace".into(), message: e.to_string() };
        w.write_record(TRACE_COLUMNS).map_err(fail)?;
        match self {
            RunReport::Deterministic(r) => {
                for rec in &r.records {
                    w.write_record([
                        rec.k.to_string(),
                        real(rec.f),
                        real(rec.gradient_norm),
                        real(rec.lambda),
                        opt(rec.alpha),
                        opt(rec.beta),
                        rec.step.as_str().to_string(),
                        real(rec.lipschitz_gradient),
                        real(rec.lipschitz_hessian),
                        rec.feval_count.to_string(),
                    ])
                    .map_err(fail)?;
                }
            }
            RunReport::Stochastic(r) => {
                for rec in &r.records {
                    let branch = if rec.omega.is_some() {
                        "noise"
                    } else if rec.reverted_curvature_step {
                        "reverted"
                    } else if rec.d_norm > 0.0 {
                        "both"
                    } else {
                        "descent"
                    };
                    w.write_record([
                        rec.k.to_string(),
                        opt(rec.full_loss.or(rec.value_before)),
                        opt(rec.exact_gradient_norm),
                        opt(rec.lambda_estimate),
                        real(rec.alpha),
                        real(rec.beta),
                        branch.to_string(),
                        opt(rec.lipschitz_gradient),
                        opt(rec.lipschitz_hessian),
                        String::new(),
                    ])
                    .map_err(fail)?;
                }
            }
        }
        w.flush().map_err(|e| HarnessError::Format { context: "trace".into(), message: e.to_string() })
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

/// Runs the planned solve.
pub fn execute(exp: &Experiment) -> Result<RunReport> {
    match (&exp.target, &exp.plan) {
        (Target::Objective(p), SolvePlan::TwoStep(cfg)) => Ok(RunReport::Deterministic(two_step_solve(p, &exp.x0, cfg)?)),
        (Target::Objective(p), SolvePlan::Dynamic(cfg)) => Ok(RunReport::Deterministic(dynamic_solve(p, &exp.x0, cfg)?)),
        (Target::FiniteSum(s), SolvePlan::StochTwoStep { config, batch_size, iterations, seed, track_exact }) => {
            let mut oracle = StochasticOracle::new(s.finite_sum(), *batch_size, *seed)?;
            let report = two_step_stochastic_solve(&mut oracle, config, &exp.x0, *iterations, *track_exact)?;
            Ok(RunReport::Stochastic(report))
        }
        (
            Target::FiniteSum(s),
            SolvePlan::StochDynamic { safeguards, use_curvature, batch_size, iterations, seed, track_exact },
        ) => {
            let mut oracle = StochasticOracle::new(s.finite_sum(), *batch_size, *seed)?;
            let report =
                dynamic_stochastic_solve(&mut oracle, safeguards, &exp.x0, *iterations, *use_curvature, *track_exact)?;
            Ok(RunReport::Stochastic(report))
        }
        _ => unreachable!("resolve pairs deterministic plans with objectives and stochastic plans with finite sums"),
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub report_path: PathBuf,
    pub trace_path: PathBuf,
}

/// File stem `<problem>__<variant>[__seed<seed>]`, restricted to `[A-Za-z0-9_.-]`.
pub fn output_stem(exp: &Experiment, seed: Option<u64>) -> String {
    let mut stem = format!("{}__{}", exp.name, exp.variant.name());
    if let (true, Some(seed)) = (exp.variant.is_stochastic(), seed) {
        stem.push_str(&format!("__seed{seed}"));
    }
    stem.chars().map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' }).collect()
}

/// Resolves `config`, runs it, and writes `<stem>.json` and
/// `<stem>.trace.csv` to `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    let exp = config.resolve()?;
    let report = execute(&exp)?;
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let stem = output_stem(&exp, config.seed);
    let report_path = out_dir.join(format!("{stem}.json"));
    let trace_path = out_dir.join(format!("{stem}.trace.csv"));
    std::fs::write(&report_path, report.to_json()?).map_err(|e| HarnessError::io(&report_path, e))?;
    let file = std::fs::File::create(&trace_path).map_err(|e| HarnessError::io(&trace_path, e))?;
    report.write_trace(std::io::BufWriter::new(file))?;
    Ok(RunOutcome { report, report_path, trace_path })
}
