use curvopt_core::linalg::{
    leftmost_eigenpair, modified_newton_shift, norm, symmetric_eigen, truncated_cg, CgStatus, Cholesky, SymMatrix,
    SHIFT_FLOOR,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn symmetric(n: usize, entries: &[f64]) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m.set_sym(i, j, entries[k]);
            k += 1;
        }
    }
    m
}

fn symmetric_strategy(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, n * (n + 1) / 2).prop_map(move |e| symmetric(n, &e))
    })
}

fn spd_strategy(max_n: usize) -> impl Strategy<Value = (SymMatrix, Vec<f64>)> {
    (1..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(-1.0f64..1.0, n * n), prop::collection::vec(-5.0f64..5.0, n)).prop_map(move |(a, g)| {
            // A A^T + I
            let mut m = SymMatrix::identity(n);
            for i in 0..n {
                for j in i..n {
                    let v: f64 = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum();
                    m.add_sym(i, j, if i == j { v } else { v });
                }
            }
            (m, g)
        })
    })
}

fn nalgebra_min_eigenvalue(h: &SymMatrix) -> f64 {
    let n = h.dim();
    let m = DMatrix::from_row_slice(n, n, h.as_slice());
    m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn leftmost_eigenpair_matches_dense_oracle(h in symmetric_strategy(20)) {
        let e = leftmost_eigenpair(&h, 1e-10).unwrap();
        prop_assert!(e.residual <= 1e-10);
        prop_assert!((norm(&e.leftmost_vector) - 1.0).abs() <= 1e-12);
        let oracle = nalgebra_min_eigenvalue(&h);
        prop_assert!((e.leftmost_value - oracle).abs() <= 1e-10, "{} vs {}", e.leftmost_value, oracle);
    }

    #[test]
    fn cg_reproduces_direct_solve((h, g) in spd_strategy(20)) {
        let out = truncated_cg(&h, &g, 10 * h.dim() + 10);
        prop_assert_eq!(out.status, CgStatus::Converged);
        let direct: Vec<f64> = Cholesky::factor(&h).unwrap().solve(&g).into_iter().map(|v| -v).collect();
        let diff: Vec<f64> = out.solution.iter().zip(&direct).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&diff) <= 1e-8 * norm(&direct).max(1e-300));
    }

    #[test]
    fn cg_curvature_certificate_is_exact(h in symmetric_strategy(12), seed in 0u64..1000) {
        let n = h.dim();
        let g: Vec<f64> = (0..n).map(|i| ((seed as f64 + 1.0) * (i as f64 + 0.7)).sin()).collect();
        let out = truncated_cg(&h, &g, 10);
        match out.status {
            CgStatus::NonpositiveCurvature => {
                let d = out.curvature_direction.as_ref().unwrap();
                prop_assert!(h.quad_form(d) <= 0.0);
            }
            CgStatus::NonpositiveCurvatureFirstIteration => {
                prop_assert!(out.curvature_direction.is_none());
                let neg: Vec<f64> = g.iter().map(|v| -v).collect();
                prop_assert_eq!(&out.solution, &neg);
            }
            _ => prop_assert!(out.curvature_direction.is_none()),
        }
    }

    #[test]
    fn shift_is_minimal_and_admissible(h in symmetric_strategy(12), log_cap in 1.0f64..8.0) {
        let cap = 10f64.powf(log_cap);
        let sys = modified_newton_shift(&h, cap).unwrap();
        let b = h.shifted(sys.shift);
        let eig = symmetric_eigen(&b);
        prop_assert!(eig.min() > 0.0);
        // Recomputed eigenvalues carry absolute error ~ eps |B|, which is
        // relative error eps |B| / lambda_min(B) in the condition number.
        let margin = 1e-9 + 16.0 * f64::EPSILON * b.frobenius() / eig.min();
        prop_assert!(eig.max() / eig.min() <= cap * (1.0 + margin));
        if sys.shift > SHIFT_FLOOR {
            let half = h.shifted(sys.shift / 2.0);
            let e = symmetric_eigen(&half);
            prop_assert!(e.min() <= 0.0 || e.max() / e.min() > cap);
        }
    }
}

#[test]
fn eigen_examples() {
    let e = leftmost_eigenpair(&SymMatrix::from_diagonal(&[2.0, -3.0]), 1e-12).unwrap();
    assert_eq!(e.leftmost_value, -3.0);
    assert_eq!(e.leftmost_vector[0], 0.0);
    assert_eq!(e.leftmost_vector[1].abs(), 1.0);

    let swap = SymMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
    let e = leftmost_eigenpair(&swap, 1e-12).unwrap();
    assert!((e.leftmost_value + 1.0).abs() < 1e-15);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((e.leftmost_vector[0].abs() - r).abs() < 1e-15);
    assert!((e.leftmost_vector[0] + e.leftmost_vector[1]).abs() < 1e-15);

    let e = leftmost_eigenpair(&SymMatrix::identity(5), 1e-12).unwrap();
    assert_eq!(e.leftmost_value, 1.0);
}

#[test]
fn asymmetric_input_is_rejected() {
    assert!(SymMatrix::from_rows(&[[1.0, 2.0], [2.0 + 1e-9, 1.0]]).is_err());
}

#[test]
fn cg_hand_executed_example() {
    let h = SymMatrix::from_diagonal(&[1.0, -1.0]);
    let out = truncated_cg(&h, &[1.0, 0.5], 10);
    assert_eq!(out.status, CgStatus::NonpositiveCurvature);
    let s = &out.solution;
    assert!((s[0] + 5.0 / 3.0).abs() < 1e-15 && (s[1] + 5.0 / 6.0).abs() < 1e-15);
    let d = out.curvature_direction.unwrap();
    assert!((d[0] + 10.0 / 9.0).abs() < 1e-14 && (d[1] + 20.0 / 9.0).abs() < 1e-14);
    assert!((h.quad_form(&d) + 300.0 / 81.0).abs() < 1e-13);

    let out = truncated_cg(&h, &[1.0, 1.0], 10);
    assert_eq!(out.status, CgStatus::NonpositiveCurvatureFirstIteration);
    assert_eq!(out.solution, vec![-1.0, -1.0]);
    assert!(out.curvature_direction.is_none());
}

#[test]
fn shift_examples() {
    assert_eq!(modified_newton_shift(&SymMatrix::from_diagonal(&[1.0, 2.0]), 1e8).unwrap().shift, 0.0);

    let h = SymMatrix::from_diagonal(&[-1.0, 2.0]);
    let shift = modified_newton_shift(&h, 1e8).unwrap().shift;
    // Bisection on (2 + t) / (t - 1) = 1e8 over t in (1, 2).
    let (mut lo, mut hi) = (1.0 + 1e-15, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (2.0 + mid) / (mid - 1.0) > 1e8 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((shift - hi).abs() <= 1e-10);
    assert!((shift - (1.0 + 3.0 / (1e8 - 1.0))).abs() <= 1e-10);

    let zero = modified_newton_shift(&SymMatrix::zeros(2), 1e8).unwrap();
    assert_eq!(zero.shift, SHIFT_FLOOR);
    assert_eq!(zero.condition_number(), 1.0);
}
