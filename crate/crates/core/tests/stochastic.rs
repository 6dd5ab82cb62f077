use curvopt_core::deterministic::DirectionCriteria;
use curvopt_core::linalg::{dot, norm, SymMatrix};
use curvopt_core::problem::{
    Dataset, FiniteSum, FiniteSumProblem, QuadraticFiniteSum, StochasticOracle, Stream, TwoLayerNetwork,
};
use curvopt_core::stochastic::*;
use proptest::prelude::*;

/// `f = mean_i (x' A_i x / 2)` with `A_1 = diag(1, -1)`, `A_2 = diag(1, 3)`.
fn split_saddle() -> QuadraticFiniteSum {
    let a1 = SymMatrix::from_diagonal(&[1.0, -1.0]);
    let a2 = SymMatrix::from_diagonal(&[1.0, 3.0]);
    QuadraticFiniteSum::from_components(vec![a1, a2], vec![vec![0.0; 2]; 2]).unwrap()
}

fn unit_sphere(n: usize) -> QuadraticFiniteSum {
    QuadraticFiniteSum::from_components(vec![SymMatrix::identity(n)], vec![vec![0.0; n]]).unwrap()
}

fn network() -> FiniteSumProblem<TwoLayerNetwork> {
    let data = Dataset::synthetic_teacher(60, 3, 3, 0.05, 11);
    FiniteSumProblem::new("net", data, TwoLayerNetwork::new(3))
}

fn small_start(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1e-3 * ((i as f64 * 1.7).sin())).collect()
}

#[test]
fn full_batch_estimates_are_exact() {
    let q = QuadraticFiniteSum::new(&[1.0, 2.0, 5.0], 7, 2.0, 1.0, 3).unwrap();
    let mut oracle = StochasticOracle::new(&q, 7, 1).unwrap();
    assert!(oracle.is_full_batch());
    let x = [0.3, -0.7, 1.1];
    let all = q.all_indices();
    let est = oracle.sample_estimates(&x);
    let (f, g) = q.mean_value_gradient(&x, &all);
    assert_eq!(est.value, f);
    assert_eq!(est.gradient, g);
    assert_eq!(est.hessian, q.mean_hessian(&x, &all));
    assert_eq!(est.gradient_batch, all);
}

#[test]
fn batch_estimates_are_unbiased_over_all_subsets() {
    let q = QuadraticFiniteSum::new(&[1.0, 2.0], 4, 3.0, 2.0, 8).unwrap();
    let oracle = StochasticOracle::new(&q, 2, 0).unwrap();
    let x = [0.4, -1.3];
    let mut g_avg = [0.0; 2];
    let mut h_avg = SymMatrix::zeros(2);
    let mut subsets = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            let batch = [i, j];
            let g = oracle.batch_gradient(&x, &batch);
            g_avg[0] += g[0];
            g_avg[1] += g[1];
            h_avg.add_scaled(1.0, &oracle.batch_hessian(&x, &batch));
            subsets += 1;
        }
    }
    assert_eq!(subsets, 6);
    let (_, g) = oracle.exact_value_gradient(&x);
    let h = q.mean_hessian(&x, &q.all_indices());
    for k in 0..2 {
        assert!((g_avg[k] / 6.0 - g[k]).abs() <= 1e-12);
        for l in 0..2 {
            assert!((h_avg.get(k, l) / 6.0 - h.get(k, l)).abs() <= 1e-12);
        }
    }
}

#[test]
fn drawn_batches_cover_subsets_uniformly() {
    let q = QuadraticFiniteSum::new(&[1.0], 4, 0.0, 0.0, 0).unwrap();
    let oracle = StochasticOracle::new(&q, 2, 5).unwrap();
    let mut counts = std::collections::HashMap::new();
    let draws = 60_000u64;
    for k in 0..draws {
        let b = oracle.batch_at(Stream::Gradient, k, 0);
        assert_eq!(b.len(), 2);
        assert!(b[0] < b[1]);
        *counts.entry(b).or_insert(0u64) += 1;
    }
    assert_eq!(counts.len(), 6);
    // Each subset has probability 1/6; allow five binomial standard deviations.
    let p = 1.0 / 6.0;
    let sd = (draws as f64 * p * (1.0 - p)).sqrt();
    for c in counts.values() {
        assert!((*c as f64 - draws as f64 * p).abs() <= 5.0 * sd);
    }
}

#[test]
fn split_saddle_step_uses_batch_curvature() {
    let q = split_saddle();
    let criteria = DirectionCriteria::default();
    let x = [1.0, 0.5];
    let mut seen_curvature = false;
    for seed in 0..20 {
        let mut oracle = StochasticOracle::new(&q, 1, seed).unwrap();
        oracle.begin_iteration(1);
        let est = oracle.clone().sample_estimates(&x);
        let dirs = noise_directions(&est.gradient, &est.hessian, &criteria).unwrap();
        let (x_next, record) = curvature_noise_step(&x, &mut oracle, &criteria, 0.5, 0.25).unwrap();
        let omega = record.omega.unwrap();
        assert!((-1.0..=1.0).contains(&omega));
        if est.hessian_batch == [0] {
            seen_curvature = true;
            assert_eq!(dirs.lambda, -1.0);
            assert_eq!(dirs.d[0], 0.0);
            assert!((norm(&dirs.d) - norm(&dirs.s)).abs() <= 1e-12 * norm(&dirs.s));
            assert!(dot(&est.gradient, &dirs.d) <= 0.0);
        } else {
            assert_eq!(dirs.d, [0.0, 0.0]);
        }
        for i in 0..2 {
            let expected = x[i] + 0.5 * dirs.s[i] + 0.25 * omega * dirs.d[i];
            assert_eq!(x_next[i], expected);
        }
    }
    assert!(seen_curvature);
}

#[test]
fn full_batch_sphere_step_lands_on_minimizer() {
    let q = unit_sphere(1);
    let mut oracle = StochasticOracle::new(&q, 1, 9).unwrap();
    oracle.begin_iteration(1);
    let (x_next, record) = curvature_noise_step(&[3.0], &mut oracle, &DirectionCriteria::default(), 1.0, 1.0).unwrap();
    assert_eq!(x_next, [0.0]);
    assert_eq!(record.d_norm, 0.0);
}

#[test]
fn curvature_noise_has_zero_mean() {
    let q = unit_sphere(1);
    let mut oracle = StochasticOracle::new(&q, 1, 21).unwrap();
    let d = [0.6, -0.8];
    let draws = 100_000u64;
    let mut mean = [0.0; 2];
    let mut second = 0.0;
    for k in 0..draws {
        oracle.begin_iteration(k);
        let w = oracle.draw_omega();
        assert!((-1.0..=1.0).contains(&w));
        mean[0] += w * d[0] / draws as f64;
        mean[1] += w * d[1] / draws as f64;
        second += w * w / draws as f64;
    }
    // sd(omega) = 1/sqrt(3); five standard errors.
    let se = (1.0f64 / 3.0 / draws as f64).sqrt();
    assert!(mean[0].abs() <= 5.0 * se && mean[1].abs() <= 5.0 * se);
    assert!((second - 1.0 / 3.0).abs() <= 0.01);
}

#[test]
fn noise_directions_reject_dimension_mismatch() {
    assert!(noise_directions(&[1.0], &SymMatrix::identity(2), &DirectionCriteria::default()).is_err());
}

#[test]
fn dynamic_estimates_grow_only_by_the_inflation_factor() {
    let p = network();
    let x0 = small_start(p.dimension());
    let mut oracle = StochasticOracle::new(&p, 8, 4).unwrap();
    // Small initial estimates force overshooting steps, so inflation occurs.
    let cfg = SafeguardConfig { l_init: 0.05, sigma_init: 0.05, ..SafeguardConfig::default() };
    let report = dynamic_stochastic_solve(&mut oracle, &cfg, &x0, 300, true, false).unwrap();
    let mut grew = 0;
    for pair in report.records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (la, lb) = (a.lipschitz_gradient.unwrap(), b.lipschitz_gradient.unwrap());
        let (sa, sb) = (a.lipschitz_hessian.unwrap(), b.lipschitz_hessian.unwrap());
        let descent_failed = a.value_after_descent.unwrap() > a.value_before.unwrap();
        assert_eq!(lb, if descent_failed { la * 1.2 } else { la });
        assert_eq!(sb, if a.reverted_curvature_step { sa * 1.2 } else { sa });
        grew += usize::from(lb > la) + usize::from(sb > sa);
    }
    assert_eq!(report.records[0].lipschitz_gradient, Some(0.05));
    assert_eq!(report.records[0].lipschitz_hessian, Some(0.05));
    assert!(grew > 0);
    for r in &report.records {
        assert!(r.s_norm <= 10.0 * (1.0 + 1e-12));
        assert!(r.beta * r.d_norm <= 0.2 * r.alpha * r.s_norm * (1.0 + 1e-9));
    }
}

#[test]
fn default_safeguards() {
    let cfg = SafeguardConfig::default();
    assert_eq!((cfg.max_s_norm, cfg.max_ratio_d_to_s, cfg.inflate_factor), (10.0, 0.2, 1.2));
    assert_eq!((cfg.l_init, cfg.sigma_init), (80.0, 100.0));
}

#[test]
fn seeded_runs_replay_exactly() {
    let p = network();
    let x0 = small_start(p.dimension());
    let run_dynamic = |seed| {
        let mut oracle = StochasticOracle::new(&p, 8, seed).unwrap();
        dynamic_stochastic_solve(&mut oracle, &SafeguardConfig::default(), &x0, 50, true, true).unwrap()
    };
    let a = run_dynamic(17);
    let b = run_dynamic(17);
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_x, b.final_x);
    assert_eq!(a.final_loss.to_bits(), b.final_loss.to_bits());
    assert_ne!(a.final_x, run_dynamic(18).final_x);

    let run_two_step = |seed| {
        let mut oracle = StochasticOracle::new(&p, 8, seed).unwrap();
        two_step_stochastic_solve(&mut oracle, &StochasticStepConfig::constant(0.05), &x0, 50, true).unwrap()
    };
    let c = run_two_step(3);
    assert_eq!(c.records, run_two_step(3).records);
    assert_ne!(c.final_x, run_two_step(4).final_x);
}

#[test]
fn convex_full_batch_matches_descent_only() {
    let q = QuadraticFiniteSum::new(&[0.5, 1.0, 4.0], 5, 0.05, 0.5, 2).unwrap();
    let x0 = [2.0, -1.0, 0.5];
    let run = |use_curvature| {
        let mut oracle = StochasticOracle::new(&q, 5, 0).unwrap();
        dynamic_stochastic_solve(&mut oracle, &SafeguardConfig::default(), &x0, 40, use_curvature, false).unwrap()
    };
    let with = run(true);
    let without = run(false);
    assert!(with.records.iter().all(|r| r.d_norm == 0.0));
    assert_eq!(with.final_x, without.final_x);
    assert!(!with.used_negative_curvature());
}

#[test]
fn diminishing_schedule_is_nonsummable_with_summable_squares() {
    let s = StepSchedule::Diminishing { a: 1.0, b: 1.0 };
    let partial = |n: u64| (1..=n).map(|k| s.at(k)).sum::<f64>();
    let squares: f64 = (1..=1_000_000u64).map(|k| s.at(k).powi(2)).sum();
    // Partial sums grow like ln n; squares stay below sum 1/k^2 = pi^2/6.
    assert!(partial(1_000_000) - partial(1_000) > 6.0);
    assert!(squares < std::f64::consts::PI.powi(2) / 6.0);
    assert!((1..100u64).all(|k| s.at(k + 1) < s.at(k)));
}

#[test]
fn noiseless_sphere_decays_geometrically() {
    let q = unit_sphere(3);
    let mut oracle = StochasticOracle::new(&q, 1, 0).unwrap();
    let x0 = [1.0, -2.0, 0.5];
    let report = two_step_stochastic_solve(&mut oracle, &StochasticStepConfig::constant(0.25), &x0, 30, true).unwrap();
    let f0 = 0.5 * dot(&x0, &x0);
    for (i, r) in report.records.iter().enumerate() {
        // x_k = 0.75^k x0 exactly up to rounding.
        let expected = 0.75f64.powi(2 * i as i32) * f0;
        assert!((r.full_loss.unwrap() - expected).abs() <= 1e-14 * f0);
        assert_eq!(r.d_norm, 0.0);
    }
    assert!(report.mean_squared_gradient().unwrap() <= dot(&x0, &x0));
}

#[test]
fn admissible_cap_is_enforced() {
    let m = MomentBounds { s1: 0.0, s2: 2.0, d1: 0.0, d2: 2.0 };
    let cap = StochasticStepConfig::constant_step_cap(1.0, 4.0, &m);
    assert_eq!(cap, 1.0 / 16.0);
    let mut cfg = StochasticStepConfig::constant(cap);
    cfg.lipschitz = Some(4.0);
    cfg.moment_bounds = Some(m);
    assert!(cfg.validate().is_ok());
    cfg.alpha_schedule = StepSchedule::Constant(cap * 1.01);
    assert!(cfg.validate().is_err());
}

#[test]
fn zero_noise_moments_have_zero_intercept() {
    let q = unit_sphere(2);
    let points = vec![vec![1.0, 0.0], vec![0.3, -2.0]];
    let m = measure_moments(&q, &points, 1, 50, 0, &DirectionCriteria::default(), 2.0).unwrap();
    assert_eq!(m, MomentBounds { s1: 0.0, s2: 2.0, d1: 0.0, d2: 2.0 });
}

#[test]
fn expected_descent_without_noise_or_steps() {
    let q = unit_sphere(2);
    let m = MomentBounds { s1: 0.0, s2: 2.0, d1: 0.0, d2: 2.0 };
    let criteria = DirectionCriteria::default();
    let x = [1.0, 1.0];
    let still = expected_descent_check(&q, &x, 1, 0.0, 0.0, 1.0, &m, &criteria, 10, 0).unwrap();
    assert_eq!(still.empirical_decrease, 0.0);
    assert_eq!(still.bound, 0.0);
    assert!(still.holds(0.0));
    let step = expected_descent_check(&q, &x, 1, 0.25, 0.25, 1.0, &m, &criteria, 10, 0).unwrap();
    // f(0.75 x) - f(x) = -0.4375 against bound -(0.25 - 0.0625 - 1/48) * 2.
    assert!((step.empirical_decrease + 0.4375).abs() < 1e-15);
    assert!(step.holds(0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn safeguards_are_idempotent(
        s in prop::collection::vec(-50.0f64..50.0, 1..6),
        d_seed in prop::collection::vec(-50.0f64..50.0, 6),
        alpha in 1e-3f64..1.0,
        beta in 1e-3f64..1.0,
    ) {
        let d = &d_seed[..s.len()];
        let cfg = SafeguardConfig::default();
        let (s1, d1) = apply_safeguards(&s, d, alpha, beta, &cfg);
        let (s2, d2) = apply_safeguards(&s1, &d1, alpha, beta, &cfg);
        prop_assert_eq!(&s1, &s2);
        prop_assert_eq!(&d1, &d2);
        prop_assert!(norm(&s1) <= cfg.max_s_norm * (1.0 + 1e-12));
        prop_assert!(beta * norm(&d1) <= cfg.max_ratio_d_to_s * alpha * norm(&s1) * (1.0 + 1e-12));
    }
}
