use std::path::{Path, PathBuf};

use curvopt_core::problem::{starting_points, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{compare, ComparisonRow};
use crate::config::{unknown_problem, ExperimentConfig, Variant};
use crate::error::{HarnessError, Result};
use crate::report::{execute, real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Steepest descent.
    Sd,
    /// Modified Newton.
    Mn,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sd => "sd",
            Strategy::Mn => "mn",
        }
    }

    /// (descent-only, curvature-enabled) variants.
    pub fn variants(self) -> (Variant, Variant) {
        match self {
            Strategy::Sd => (Variant::DynamicSdDescentOnly, Variant::DynamicSd),
            Strategy::Mn => (Variant::DynamicMnDescentOnly, Variant::DynamicMn),
        }
    }
}

/// Every problem x strategy x starting point, each solved with and
/// without curvature steps. `base` supplies criteria, termination and
/// Lipschitz settings.
#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub problems: Vec<String>,
    pub strategies: Vec<Strategy>,
    /// Starting points per problem: the default start, then seeded
    /// perturbations of half-width `radius`.
    pub starts: usize,
    pub radius: f64,
    pub seed: u64,
    pub base: ExperimentConfig,
}

impl CampaignSpec {
    /// Built-in registry, both strategies, five starts.
    pub fn registry_default() -> Self {
        CampaignSpec {
            problems: curvopt_core::problem::registry().iter().map(|e| e.name.to_string()).collect(),
            strategies: vec![Strategy::Sd, Strategy::Mn],
            starts: 5,
            radius: 0.5,
            seed: 7,
            base: ExperimentConfig::default(),
        }
    }

    pub fn pairs(&self) -> Result<Vec<ExperimentPair>> {
        if self.problems.is_empty() || self.strategies.is_empty() || self.starts == 0 {
            return Err(HarnessError::usage("campaign needs at least one problem, strategy and start"));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(HarnessError::usage("campaign radius must be nonnegative"));
        }
        let mut pairs = Vec::new();
        for name in &self.problems {
            let problem = Problem::by_name(name).ok_or_else(|| unknown_problem(name))?;
            let starts = starting_points(problem.objective(), self.starts, self.radius, self.seed);
            for &strategy in &self.strategies {
                for (i, x0) in starts.iter().enumerate() {
                    let (plain, curved) = strategy.variants();
                    let config = |variant| ExperimentConfig {
                        problem: Some(name.clone()),
                        dataset: None,
                        variant: Some(variant),
                        start: Some(x0.clone()),
                        ..self.base.clone()
                    };
                    pairs.push(ExperimentPair {
                        problem: name.clone(),
                        strategy,
                        start: i,
                        descent_only: config(plain),
                        with_curvature: config(curved),
                    });
                }
            }
        }
        Ok(pairs)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPair {
    pub problem: String,
    pub strategy: Strategy,
    pub start: usize,
    pub descent_only: ExperimentConfig,
    pub with_curvature: ExperimentConfig,
}

impl ExperimentPair {
    pub fn run(&self) -> Result<ComparisonRow> {
        let a = execute(&self.descent_only.resolve()?)?;
        let b = execute(&self.with_curvature.resolve()?)?;
        let mut row = compare(&a, &b)?;
        row.strategy = Some(self.strategy.name().to_string());
        row.start = Some(self.start);
        Ok(row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFailure {
    pub problem: String,
    pub strategy: String,
    pub start: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct CampaignOutcome {
    /// Rows whose curvature-enabled run used a curvature step, sorted by
    /// `f_measure`, largest first.
    pub rows: Vec<ComparisonRow>,
    /// Every successful row, in pair order.
    pub all_rows: Vec<ComparisonRow>,
    pub failures: Vec<PairFailure>,
    pub warnings: Vec<String>,
}

/// Runs all pairs in parallel. A failing pair is recorded and skipped.
pub fn run_pairs(pairs: &[ExperimentPair]) -> CampaignOutcome {
    let results: Vec<Result<ComparisonRow>> = pairs.par_iter().map(ExperimentPair::run).collect();
    let mut outcome = CampaignOutcome::default();
    for (pair, result) in pairs.iter().zip(results) {
        match result {
            Ok(row) => outcome.all_rows.push(row),
            Err(e) => outcome.failures.push(PairFailure {
                problem: pair.problem.clone(),
                strategy: pair.strategy.name().to_string(),
                start: pair.start,
                message: e.to_string(),
            }),
        }
    }
    outcome.rows = outcome.all_rows.iter().filter(|r| r.used_negative_curvature).cloned().collect();
    // Stable: ties keep pair order, so output is a function of the spec.
    outcome.rows.sort_by(|a, b| b.f_measure.total_cmp(&a.f_measure));
    if outcome.rows.is_empty() {
        outcome.warnings.push("no run used a negative curvature step; the comparison table is empty".into());
    }
    for f in &outcome.failures {
        outcome.warnings.push(format!("{} [{} start {}] failed: {}", f.problem, f.strategy, f.start, f.message));
    }
    outcome
}

pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignOutcome> {
    Ok(run_pairs(&spec.pairs()?))
}

/// Plot-data files, one per measure.
pub const PLOT_FILES: [&str; 3] = ["plot_f_measure.csv", "plot_iter_measure.csv", "plot_feval_measure.csv"];

/// Writes `comparison.csv` (filtered, sorted rows), `all_pairs.csv`, one
/// plot-data file per measure in the `comparison.csv` order, and
/// `failures.csv` when some pair failed. Returns the paths written.
pub fn write_campaign(outcome: &CampaignOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    let table = dir.join("comparison.csv");
    write_rows(&table, &outcome.rows)?;
    written.push(table);
    let all = dir.join("all_pairs.csv");
    write_rows(&all, &outcome.all_rows)?;
    written.push(all);

    let measures: [fn(&ComparisonRow) -> f64; 3] = [|r| r.f_measure, |r| r.iter_measure, |r| r.feval_measure];
    for (file, measure) in PLOT_FILES.iter().zip(measures) {
        let path = dir.join(file);
        let mut w = writer(&path)?;
        let fail = |e: csv::Error| HarnessError::Format { context: path.display().to_string(), message: e.to_string() };
        w.write_record(["position", "label", "value"]).map_err(fail)?;
        for (i, row) in outcome.rows.iter().enumerate() {
            w.write_record([(i + 1).to_string(), row_label(row), real(measure(row))]).map_err(fail)?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }

    if !outcome.failures.is_empty() {
        let path = dir.join("failures.csv");
        let mut w = writer(&path)?;
        for f in &outcome.failures {
            w.serialize(f).map_err(|e| HarnessError::Format { context: path.display().to_string(), message: e.to_string() })?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn row_label(row: &ComparisonRow) -> String {
    match (&row.strategy, row.start) {
        (Some(s), Some(i)) => format!("{}/{}/{}", row.problem, s, i),
        _ => row.problem.clone(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| HarnessError::Format { context: path.display().to_string(), message: e.to_string() })
}

/// Writes rows with a fixed header and 17-digit reals.
pub fn write_rows(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = writer(path)?;
    let fail = |e: csv::Error| HarnessError::Format { context: path.display().to_string(), message: e.to_string() };
    w.write_record(["problem", "strategy", "start", "f_measure", "iter_measure", "feval_measure", "used_negative_curvature"])
        .map_err(fail)?;
    for r in rows {
        w.write_record([
            r.problem.clone(),
            r.strategy.clone().unwrap_or_default(),
            r.start.map(|s| s.to_string()).unwrap_or_default(),
            real(r.f_measure),
            real(r.iter_measure),
            real(r.feval_measure),
            r.used_negative_curvature.to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Median of `values`; the mean of the middle two for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}
