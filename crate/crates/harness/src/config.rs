use std::path::{Path, PathBuf};

use curvopt_core::deterministic::{
    DescentStrategy, DirectionCriteria, DynamicConfig, LipschitzState, TerminationSpec, TwoStepConfig,
};
use curvopt_core::problem::{self, Problem};
use curvopt_core::stochastic::{BetaSchedule, SafeguardConfig, StepSchedule, StochasticStepConfig};
use serde::{Deserialize, Serialize};

use crate::dataset::load_dataset;
use crate::error::{HarnessError, Result};
use crate::sources::{random_start, Source, FINITE_SUMS};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CURVOPT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "curvopt-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Variant {
    TwoStep,
    DynamicSd,
    DynamicMn,
    DynamicSdDescentOnly,
    DynamicMnDescentOnly,
    StochTwoStep,
    StochDynamic,
    StochDynamicDescentOnly,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::TwoStep,
        Variant::DynamicSd,
        Variant::DynamicMn,
        Variant::DynamicSdDescentOnly,
        Variant::DynamicMnDescentOnly,
        Variant::StochTwoStep,
        Variant::StochDynamic,
        Variant::StochDynamicDescentOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::TwoStep => "two_step",
            Variant::DynamicSd => "dynamic_sd",
            Variant::DynamicMn => "dynamic_mn",
            Variant::DynamicSdDescentOnly => "dynamic_sd_descent_only",
            Variant::DynamicMnDescentOnly => "dynamic_mn_descent_only",
            Variant::StochTwoStep => "stoch_two_step",
            Variant::StochDynamic => "stoch_dynamic",
            Variant::StochDynamicDescentOnly => "stoch_dynamic_descent_only",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Variant::StochTwoStep | Variant::StochDynamic | Variant::StochDynamicDescentOnly)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Linear,
    TwoLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: PathBuf,
    #[serde(default)]
    pub header: bool,
    #[serde(default)]
    pub model: ModelKind,
    /// Hidden units of the two-layer model.
    #[serde(default = "default_hidden")]
    pub hidden: usize,
}

fn default_hidden() -> usize {
    4
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriteriaSection {
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub delta: Option<f64>,
    pub zeta: Option<f64>,
    pub eta: Option<f64>,
    pub curvature_threshold: Option<f64>,
}

impl CriteriaSection {
    fn apply(&self, c: &mut DirectionCriteria) {
        let pairs = [
            (&mut c.gamma, self.gamma),
            (&mut c.theta, self.theta),
            (&mut c.delta, self.delta),
            (&mut c.zeta, self.zeta),
            (&mut c.eta, self.eta),
            (&mut c.curvature_threshold, self.curvature_threshold),
        ];
        for (slot, v) in pairs {
            if let Some(v) = v {
                *slot = v;
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TerminationSection {
    pub grad_tol_rel: Option<f64>,
    pub curv_tol_rel: Option<f64>,
    pub max_iterations: Option<usize>,
    pub min_step_norm: Option<f64>,
}

impl TerminationSection {
    fn apply(&self, t: &mut TerminationSpec) {
        if let Some(v) = self.grad_tol_rel {
            t.grad_tol_rel = v;
        }
        if let Some(v) = self.curv_tol_rel {
            t.curv_tol_rel = v;
        }
        if let Some(v) = self.max_iterations {
            t.max_iterations = v;
        }
        if let Some(v) = self.min_step_norm {
            t.min_step_norm = v;
        }
    }
}

/// Initial Lipschitz estimates of the dynamic method.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LipschitzSection {
    pub gradient: Option<f64>,
    pub hessian: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoStepSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StochasticSection {
    pub batch_size: Option<usize>,
    pub iterations: Option<u64>,
    /// Constant stepsize.
    pub alpha: Option<f64>,
    /// Diminishing stepsize `a / (b + k)`.
    pub diminishing_a: Option<f64>,
    pub diminishing_b: Option<f64>,
    /// `beta_k = chi alpha_k`; the default is `chi = 1`.
    pub chi: Option<f64>,
    /// Constant `beta_k`, replacing `chi`.
    pub beta: Option<f64>,
    /// Record exact gradient norms and full losses at every iterate.
    pub track_exact: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafeguardSection {
    pub max_s_norm: Option<f64>,
    pub max_ratio_d_to_s: Option<f64>,
    pub inflate_factor: Option<f64>,
    pub l_init: Option<f64>,
    pub sigma_init: Option<f64>,
}

/// One experiment as written in a TOML file. Every field is optional in
/// the file; [`ExperimentConfig::resolve`] reports what a variant lacks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: Option<String>,
    pub dataset: Option<DatasetSection>,
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub start: Option<Vec<f64>>,
    /// Half-width of the random start used for finite-sum problems.
    pub start_scale: Option<f64>,
    pub condition_cap: Option<f64>,
    pub criteria: CriteriaSection,
    pub termination: TerminationSection,
    pub lipschitz: LipschitzSection,
    pub two_step: TwoStepSection,
    pub stochastic: StochasticSection,
    pub safeguards: SafeguardSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub problem: Option<String>,
    pub dataset: Option<PathBuf>,
    pub header: bool,
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub max_iterations: Option<usize>,
    pub grad_tol: Option<f64>,
}

/// What to run, fully validated.
#[derive(Debug, Clone)]
pub enum SolvePlan {
    TwoStep(TwoStepConfig),
    Dynamic(DynamicConfig),
    StochTwoStep { config: StochasticStepConfig, batch_size: usize, iterations: u64, seed: u64, track_exact: bool },
    StochDynamic {
        safeguards: SafeguardConfig,
        use_curvature: bool,
        batch_size: usize,
        iterations: u64,
        seed: u64,
        track_exact: bool,
    },
}

#[derive(Debug)]
pub enum Target {
    Objective(Problem),
    FiniteSum(Source),
}

#[derive(Debug)]
pub struct Experiment {
    pub name: String,
    pub variant: Variant,
    pub target: Target,
    pub x0: Vec<f64>,
    pub plan: SolvePlan,
}

fn missing(field: &str, variant: Variant) -> HarnessError {
    HarnessError::usage(format!("field `{field}` is required for variant {}", variant.name()))
}

fn section_error(section: &str) -> impl Fn(curvopt_core::Error) -> HarnessError + '_ {
    move |e| HarnessError::usage(format!("section `{section}`: {e}"))
}

pub fn unknown_problem(name: &str) -> HarnessError {
    let mut known: Vec<&str> = problem::registry().iter().map(|e| e.name).collect();
    for (name, _) in FINITE_SUMS {
        if !known.contains(name) {
            known.push(name);
        }
    }
    HarnessError::usage(format!("unknown problem `{name}`; known problems: {}", known.join(", ")))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        toml::from_str(&text).map_err(|e| HarnessError::usage(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.problem {
            self.problem = Some(p.clone());
            self.dataset = None;
        }
        if let Some(path) = &o.dataset {
            let base = self.dataset.take();
            self.dataset = Some(DatasetSection {
                path: path.clone(),
                header: o.header || base.as_ref().is_some_and(|d| d.header),
                model: base.as_ref().map_or(ModelKind::Linear, |d| d.model),
                hidden: base.as_ref().map_or(default_hidden(), |d| d.hidden),
            });
            self.problem = None;
        }
        if o.variant.is_some() {
            self.variant = o.variant;
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.out_dir.is_some() {
            self.out_dir.clone_from(&o.out_dir);
        }
        if let Some(n) = o.max_iterations {
            self.termination.max_iterations = Some(n);
            self.stochastic.iterations = Some(n as u64);
        }
        if o.grad_tol.is_some() {
            self.termination.grad_tol_rel = o.grad_tol;
        }
    }

    /// Output directory: the config value, else the environment variable,
    /// else [`DEFAULT_OUT_DIR`].
    pub fn output_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    fn source(&self) -> Result<Option<Source>> {
        match (&self.problem, &self.dataset) {
            (Some(_), Some(_)) | (None, None) => {
                Err(HarnessError::usage("set exactly one of the fields `problem` and `dataset`"))
            }
            (Some(name), None) => Ok(Source::by_name(name)),
            (None, Some(d)) => {
                let data = load_dataset(&d.path, d.header)?;
                let name = d.path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string();
                Ok(Some(match d.model {
                    ModelKind::Linear => {
                        Source::Linear(problem::FiniteSumProblem::new(name, data, problem::LinearLeastSquares))
                    }
                    ModelKind::TwoLayer => {
                        if d.hidden == 0 {
                            return Err(HarnessError::usage("field `dataset.hidden` must be positive"));
                        }
                        Source::Network(problem::FiniteSumProblem::new(name, data, problem::TwoLayerNetwork::new(d.hidden)))
                    }
                }))
            }
        }
    }

    fn start_for(&self, source: &Source) -> Result<Vec<f64>> {
        let n = source.finite_sum().dimension();
        let scale = self.start_scale.unwrap_or(0.1);
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(HarnessError::usage("field `start_scale` must be nonnegative"));
        }
        Ok(random_start(n, scale, self.seed.unwrap_or(0)))
    }

    fn check_start(&self, x0: Vec<f64>, n: usize) -> Result<Vec<f64>> {
        match &self.start {
            Some(s) if s.len() != n => {
                Err(HarnessError::usage(format!("field `start` has {} entries, problem dimension is {n}", s.len())))
            }
            Some(s) if s.iter().any(|v| !v.is_finite()) => Err(HarnessError::usage("field `start` must be finite")),
            Some(s) => Ok(s.clone()),
            None => Ok(x0),
        }
    }

    fn termination(&self) -> Result<TerminationSpec> {
        let mut t = TerminationSpec::default();
        self.termination.apply(&mut t);
        t.validate().map_err(section_error("termination"))?;
        Ok(t)
    }

    /// Checks variant-specific fields and builds the problem.
    pub fn resolve(&self) -> Result<Experiment> {
        let variant = self.variant.ok_or_else(|| HarnessError::usage("field `variant` is required"))?;
        let source = self.source()?;
        if variant.is_stochastic() {
            let seed = self.seed.ok_or_else(|| missing("seed", variant))?;
            let Some(source) = source else {
                let names: Vec<&str> = FINITE_SUMS.iter().map(|(n, _)| *n).collect();
                return Err(HarnessError::usage(format!(
                    "variant {} needs a finite-sum problem or a dataset; built-in finite sums: {}",
                    variant.name(),
                    names.join(", ")
                )));
            };
            let n = source.finite_sum().dimension();
            let components = source.finite_sum().component_count();
            let x0 = self.check_start(self.start_for(&source)?, n)?;
            let st = &self.stochastic;
            let batch_size = st.batch_size.unwrap_or(components.min(32));
            if batch_size == 0 || batch_size > components {
                return Err(HarnessError::usage(format!(
                    "field `stochastic.batch_size` must lie in 1..={components}, got {batch_size}"
                )));
            }
            let iterations = st.iterations.unwrap_or(1000);
            let track_exact = st.track_exact.unwrap_or(false);
            let plan = if variant == Variant::StochTwoStep {
                SolvePlan::StochTwoStep { config: self.stochastic_steps(variant)?, batch_size, iterations, seed, track_exact }
            } else {
                let sg = &self.safeguards;
                let mut safeguards = SafeguardConfig::default();
                let pairs = [
                    (&mut safeguards.max_s_norm, sg.max_s_norm),
                    (&mut safeguards.max_ratio_d_to_s, sg.max_ratio_d_to_s),
                    (&mut safeguards.inflate_factor, sg.inflate_factor),
                    (&mut safeguards.l_init, sg.l_init),
                    (&mut safeguards.sigma_init, sg.sigma_init),
                ];
                for (slot, v) in pairs {
                    if let Some(v) = v {
                        *slot = v;
                    }
                }
                safeguards.validate().map_err(section_error("safeguards"))?;
                let use_curvature = variant == Variant::StochDynamic;
                SolvePlan::StochDynamic { safeguards, use_curvature, batch_size, iterations, seed, track_exact }
            };
            let name = source.finite_sum().name().to_string();
            return Ok(Experiment { name, variant, target: Target::FiniteSum(source), x0, plan });
        }

        let problem = match source {
            Some(source) => {
                let start = self.start_for(&source)?;
                source.into_problem(start)
            }
            None => {
                let name = self.problem.as_deref().unwrap_or_default();
                Problem::by_name(name).ok_or_else(|| unknown_problem(name))?
            }
        };
        let x0 = self.check_start(problem.default_start(), problem.dimension())?;
        let termination = self.termination()?;
        let plan = match variant {
            Variant::TwoStep => {
                let alpha = self.two_step.alpha.ok_or_else(|| missing("two_step.alpha", variant))?;
                let beta = self.two_step.beta.ok_or_else(|| missing("two_step.beta", variant))?;
                let mut cfg = TwoStepConfig::new(alpha, beta);
                self.criteria.apply(&mut cfg.criteria);
                cfg.termination = termination;
                cfg.validate().map_err(section_error("two_step"))?;
                SolvePlan::TwoStep(cfg)
            }
            _ => {
                let strategy = match variant {
                    Variant::DynamicMn | Variant::DynamicMnDescentOnly => DescentStrategy::ModifiedNewton {
                        condition_cap: self.condition_cap.unwrap_or(DescentStrategy::DEFAULT_CONDITION_CAP),
                    },
                    _ => DescentStrategy::Steepest,
                };
                let use_curvature = matches!(variant, Variant::DynamicSd | Variant::DynamicMn);
                let mut cfg = DynamicConfig::new(strategy, use_curvature);
                self.criteria.apply(&mut cfg.criteria);
                cfg.termination = termination;
                let l = &self.lipschitz;
                cfg.lipschitz = LipschitzState::new(
                    l.gradient.unwrap_or(cfg.lipschitz.gradient),
                    l.hessian.unwrap_or(cfg.lipschitz.hessian),
                );
                cfg.validate().map_err(section_error("dynamic"))?;
                SolvePlan::Dynamic(cfg)
            }
        };
        Ok(Experiment { name: problem.name(), variant, target: Target::Objective(problem), x0, plan })
    }

    fn stochastic_steps(&self, variant: Variant) -> Result<StochasticStepConfig> {
        let st = &self.stochastic;
        let alpha_schedule = match (st.alpha, st.diminishing_a) {
            (Some(a), None) => StepSchedule::Constant(a),
            (None, Some(a)) => StepSchedule::Diminishing { a, b: st.diminishing_b.unwrap_or(1.0) },
            (Some(_), Some(_)) => {
                return Err(HarnessError::usage(
                    "fields `stochastic.alpha` and `stochastic.diminishing_a` are mutually exclusive",
                ))
            }
            (None, None) => return Err(missing("stochastic.alpha", variant)),
        };
        let beta_schedule = match (st.beta, st.chi) {
            (Some(b), None) => BetaSchedule::Constant(b),
            (None, chi) => BetaSchedule::Proportional(chi.unwrap_or(1.0)),
            (Some(_), Some(_)) => {
                return Err(HarnessError::usage("fields `stochastic.beta` and `stochastic.chi` are mutually exclusive"))
            }
        };
        let mut cfg = StochasticStepConfig::constant(1.0);
        cfg.alpha_schedule = alpha_schedule;
        cfg.beta_schedule = beta_schedule;
        self.criteria.apply(&mut cfg.criteria);
        cfg.validate().map_err(section_error("stochastic"))?;
        Ok(cfg)
    }
}
