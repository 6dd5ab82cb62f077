use curvopt::campaign::{median, run_pairs, write_campaign, CampaignSpec, Strategy, PLOT_FILES};
use curvopt::compare::{compare, relative_measure};
use curvopt::config::{ExperimentConfig, Overrides, Variant};
use curvopt::report::{execute, run_experiment, RunReport, TRACE_COLUMNS};
use curvopt::HarnessError;
use proptest::prelude::*;

fn config(problem: &str, variant: Variant) -> ExperimentConfig {
    ExperimentConfig { problem: Some(problem.into()), variant: Some(variant), ..ExperimentConfig::default() }
}

fn usage_message(result: curvopt::Result<impl std::fmt::Debug>) -> String {
    match result {
        Err(HarnessError::Usage(msg)) => msg,
        other => panic!("expected usage error, got {other:?}"),
    }
}

#[test]
fn quartic_saddle_runs_match_known_outcomes() {
    let with = execute(&config("quartic_saddle", Variant::DynamicSd).resolve().unwrap()).unwrap();
    assert_eq!(with.outcome(), "tolerance_met");
    assert!(with.final_value() <= 1e-10);
    let without = execute(&config("quartic_saddle", Variant::DynamicSdDescentOnly).resolve().unwrap()).unwrap();
    assert_eq!(without.final_value(), 0.25);
    assert_eq!(without.iterations(), 0);
    let row = compare(&without, &with).unwrap();
    assert!((row.f_measure - 0.25).abs() < 1e-12);
    assert!(row.used_negative_curvature);
}

#[test]
fn config_errors_name_the_field() {
    assert!(usage_message(config("nope", Variant::DynamicSd).resolve()).contains("known problems: sphere"));
    assert!(usage_message(config("sphere", Variant::TwoStep).resolve()).contains("`two_step.alpha`"));
    assert!(usage_message(config("teacher_network", Variant::StochDynamic).resolve()).contains("`seed`"));
    assert!(usage_message(ExperimentConfig::default().resolve()).contains("`variant`"));
    let both = ExperimentConfig { start: Some(vec![1.0]), ..config("sphere", Variant::DynamicSd) };
    assert!(usage_message(both.resolve()).contains("`start`"));
    let stoch = ExperimentConfig { seed: Some(1), ..config("sphere", Variant::StochDynamic) };
    assert!(usage_message(stoch.resolve()).contains("finite-sum"));
    let mut big = ExperimentConfig { seed: Some(1), ..config("network_regression", Variant::StochDynamic) };
    big.stochastic.batch_size = Some(41);
    assert!(usage_message(big.resolve()).contains("`stochastic.batch_size`"));
    let mut bad = config("sphere", Variant::DynamicSd);
    bad.criteria.gamma = Some(2.0);
    assert!(usage_message(bad.resolve()).contains("gamma"));
}

#[test]
fn toml_config_and_flag_overrides() {
    let text = r#"
        problem = "rosenbrock2"
        variant = "two_step"
        seed = 3

        [two_step]
        alpha = 0.001
        beta = 0.5

        [termination]
        max_iterations = 50
    "#;
    let mut cfg = ExperimentConfig::from_toml_str(text).unwrap();
    let exp = cfg.resolve().unwrap();
    assert_eq!(exp.variant, Variant::TwoStep);
    cfg.apply(&Overrides {
        variant: Some(Variant::DynamicMn),
        max_iterations: Some(7),
        grad_tol: Some(1e-3),
        ..Overrides::default()
    });
    assert_eq!(cfg.termination.max_iterations, Some(7));
    let report = execute(&cfg.resolve().unwrap()).unwrap();
    assert!(report.iterations() <= 7);
    assert!(report.method().contains("modified_newton"));

    let err = ExperimentConfig::from_toml_str("problme = \"sphere\"").unwrap_err();
    assert!(matches!(err, HarnessError::Usage(_)));
}

#[test]
fn outputs_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&config("quartic_saddle", Variant::DynamicSd), dir.path()).unwrap();
    let json = std::fs::read_to_string(&outcome.report_path).unwrap();
    let back = RunReport::from_json(&json).unwrap();
    assert_eq!(back.final_value().to_bits(), outcome.report.final_value().to_bits());

    let trace = std::fs::read_to_string(&outcome.trace_path).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), TRACE_COLUMNS.join(","));
    let RunReport::Deterministic(report) = &outcome.report else { panic!("deterministic run") };
    for (line, rec) in lines.zip(&report.records) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), TRACE_COLUMNS.len());
        // Reals round-trip bit for bit.
        assert_eq!(cells[1].parse::<f64>().unwrap().to_bits(), rec.f.to_bits());
        assert_eq!(cells[6], rec.step.as_str());
    }
}

#[test]
fn stochastic_runs_are_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig { seed: Some(5), ..config("network_regression", Variant::StochTwoStep) };
    cfg.stochastic.alpha = Some(0.05);
    cfg.stochastic.iterations = Some(30);
    cfg.stochastic.batch_size = Some(4);
    cfg.stochastic.track_exact = Some(true);
    let a = run_experiment(&cfg, dir.path()).unwrap();
    let trace_a = std::fs::read_to_string(&a.trace_path).unwrap();
    let b = run_experiment(&cfg, dir.path()).unwrap();
    assert_eq!(trace_a, std::fs::read_to_string(&b.trace_path).unwrap());
    assert!(a.report_path.to_string_lossy().contains("seed5"));
    assert_eq!(trace_a.lines().count(), 31);
}

#[test]
fn dataset_runs_use_the_loaded_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.csv");
    std::fs::write(&path, "x,y\n0,1\n1,3\n2,5\n3,7\n").unwrap();
    let mut cfg = ExperimentConfig { variant: Some(Variant::DynamicSd), ..ExperimentConfig::default() };
    cfg.apply(&Overrides { dataset: Some(path), header: true, ..Overrides::default() });
    let report = execute(&cfg.resolve().unwrap()).unwrap();
    // y = 2x + 1 exactly: the fit reaches zero loss.
    assert!(report.final_value() < 1e-9);
    let RunReport::Deterministic(r) = report else { panic!() };
    assert!((r.final_x[0] - 2.0).abs() < 1e-4 && (r.final_x[1] - 1.0).abs() < 1e-4);
}

#[test]
fn compare_examples() {
    let sphere = execute(&config("sphere", Variant::DynamicSd).resolve().unwrap()).unwrap();
    let row = compare(&sphere, &sphere).unwrap();
    assert_eq!((row.f_measure, row.iter_measure, row.feval_measure), (0.0, 0.0, 0.0));
    let other = execute(&config("beale", Variant::DynamicSd).resolve().unwrap()).unwrap();
    assert!(matches!(compare(&sphere, &other), Err(HarnessError::Usage(_))));
    assert_eq!(relative_measure(100.0, 50.0), 0.5);
}

#[test]
fn campaign_without_curvature_warns_and_writes_empty_table() {
    let spec = CampaignSpec {
        problems: vec!["sphere".into()],
        strategies: vec![Strategy::Sd],
        starts: 1,
        ..CampaignSpec::registry_default()
    };
    let outcome = run_pairs(&spec.pairs().unwrap());
    assert!(outcome.rows.is_empty());
    assert_eq!(outcome.all_rows.len(), 1);
    assert!(outcome.warnings.iter().any(|w| w.contains("empty")));
    let dir = tempfile::tempdir().unwrap();
    write_campaign(&outcome, dir.path()).unwrap();
    let table = std::fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert_eq!(table.lines().count(), 1);
}

#[test]
fn single_pair_campaign_has_one_row() {
    let spec = CampaignSpec {
        problems: vec!["quartic_saddle".into()],
        strategies: vec![Strategy::Sd],
        starts: 1,
        ..CampaignSpec::registry_default()
    };
    let outcome = run_pairs(&spec.pairs().unwrap());
    assert_eq!(outcome.rows.len(), 1);
    assert!(outcome.warnings.is_empty());
}

#[test]
fn campaign_output_is_sorted_and_deterministic() {
    let spec = CampaignSpec {
        problems: ["quartic_saddle", "monkey_saddle", "himmelblau", "styblinski_tang", "trig_sum"]
            .map(String::from)
            .to_vec(),
        starts: 3,
        ..CampaignSpec::registry_default()
    };
    let a = run_pairs(&spec.pairs().unwrap());
    let b = run_pairs(&spec.pairs().unwrap());
    assert_eq!(a.rows, b.rows);
    assert!(a.rows.windows(2).all(|w| w[0].f_measure >= w[1].f_measure));
    assert!(a.rows.iter().all(|r| r.used_negative_curvature));
    for r in &a.all_rows {
        assert!((-2.0..=2.0).contains(&r.f_measure));
        assert!((-1.0..=1.0).contains(&r.iter_measure) && (-1.0..=1.0).contains(&r.feval_measure));
    }

    let dir = tempfile::tempdir().unwrap();
    let written = write_campaign(&a, dir.path()).unwrap();
    assert!(written.len() >= 2 + PLOT_FILES.len());
    let plot = std::fs::read_to_string(dir.path().join(PLOT_FILES[0])).unwrap();
    let values: Vec<f64> = plot.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), a.rows.len());
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn unknown_campaign_problem_is_a_usage_error() {
    let spec = CampaignSpec { problems: vec!["nope".into()], ..CampaignSpec::registry_default() };
    assert!(matches!(spec.pairs(), Err(HarnessError::Usage(_))));
}

#[test]
fn median_of_even_and_odd_counts() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    assert_eq!(median(&[]), None);
}

proptest! {
    #[test]
    fn measures_are_antisymmetric(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        prop_assert_eq!(relative_measure(a, b), -relative_measure(b, a));
        prop_assert!(relative_measure(a, b).abs() <= 2.0);
    }

    #[test]
    fn same_sign_measures_stay_in_unit_interval(a in 0.0f64..1e6, b in 0.0f64..1e6) {
        prop_assert!(relative_measure(a, b).abs() <= 1.0);
    }
}
