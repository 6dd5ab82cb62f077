use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curvopt::campaign::{run_campaign, write_campaign, CampaignSpec, Strategy};
use curvopt::compare::compare;
use curvopt::config::{ExperimentConfig, Overrides, Variant};
use curvopt::report::{run_experiment, RunReport};
use curvopt::sources::FINITE_SUMS;
use curvopt::{HarnessError, Result};

/// Descent and negative-curvature methods: single runs and comparison
/// campaigns. The default output directory is taken from CURVOPT_OUT_DIR.
#[derive(Debug, Parser)]
#[command(name = "curvopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List built-in problems.
    ListProblems,
    /// Run one experiment; writes a JSON report and a CSV trace.
    Run(RunArgs),
    /// Compare a descent-only report with a curvature-enabled report.
    Compare(CompareArgs),
    /// Run descent-only versus curvature-enabled pairs over many problems.
    Campaign(CampaignArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    #[arg(long = "grad-tol")]
    grad_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    problem: Option<String>,
    /// CSV with the label in the last column.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// The dataset's first line is a header.
    #[arg(long)]
    header: bool,
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    descent_only: PathBuf,
    with_curvature: PathBuf,
    /// Also write comparison.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CampaignArgs {
    #[command(flatten)]
    common: Common,
    /// Problems to include (repeatable); all built-in problems by default.
    #[arg(long)]
    problem: Vec<String>,
    /// Descent strategies (repeatable); both by default.
    #[arg(long, value_enum)]
    strategy: Vec<Strategy>,
    #[arg(long, default_value_t = 5)]
    starts: usize,
    /// Half-width of the perturbation of the default start.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn base_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.apply(&Overrides {
        out_dir: common.out.clone(),
        max_iterations: common.max_iters,
        grad_tol: common.grad_tol,
        ..Overrides::default()
    });
    Ok(config)
}

fn list_problems() {
    println!("deterministic problems:");
    for e in curvopt_core::problem::registry() {
        println!("  {:<20} {}", e.name, e.summary);
    }
    println!("finite sums (all variants):");
    for (name, summary) in FINITE_SUMS {
        println!("  {name:<20} {summary}");
    }
}

fn run(args: &RunArgs) -> Result<ExitCode> {
    let mut config = base_config(&args.common)?;
    config.apply(&Overrides {
        problem: args.problem.clone(),
        dataset: args.dataset.clone(),
        header: args.header,
        variant: args.variant,
        seed: args.seed,
        ..Overrides::default()
    });
    let out = config.output_dir();
    let outcome = run_experiment(&config, &out)?;
    let r = &outcome.report;
    println!(
        "{} {}: {} after {} iterations, f = {:.6e}",
        r.problem(),
        r.method(),
        r.outcome(),
        r.iterations(),
        r.final_value()
    );
    println!("report {}", outcome.report_path.display());
    println!("trace  {}", outcome.trace_path.display());
    if r.is_abnormal() {
        eprintln!("warning: abnormal termination ({})", r.outcome());
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn compare_reports(args: &CompareArgs) -> Result<ExitCode> {
    let a = RunReport::load(&args.descent_only)?;
    let b = RunReport::load(&args.with_curvature)?;
    let row = compare(&a, &b)?;
    println!("problem,f_measure,iter_measure,feval_measure,used_negative_curvature");
    println!("{},{:.16e},{:.16e},{:.16e},{}", row.problem, row.f_measure, row.iter_measure, row.feval_measure, row.used_negative_curvature);
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        curvopt::campaign::write_rows(&dir.join("comparison.csv"), std::slice::from_ref(&row))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn campaign(args: &CampaignArgs) -> Result<ExitCode> {
    let base = base_config(&args.common)?;
    let mut spec = CampaignSpec::registry_default();
    if !args.problem.is_empty() {
        spec.problems.clone_from(&args.problem);
    }
    if !args.strategy.is_empty() {
        spec.strategies.clone_from(&args.strategy);
    }
    spec.starts = args.starts;
    spec.radius = args.radius;
    spec.seed = args.seed;
    let out = base.output_dir();
    spec.base = base;
    let outcome = run_campaign(&spec)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let written = write_campaign(&outcome, &out)?;
    println!(
        "{} pairs, {} rows with curvature steps, {} failures",
        outcome.all_rows.len() + outcome.failures.len(),
        outcome.rows.len(),
        outcome.failures.len()
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ListProblems => {
            list_problems();
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => run(args),
        Command::Compare(args) => compare_reports(args),
        Command::Campaign(args) => campaign(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
