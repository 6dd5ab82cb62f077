//! Finite-sum problems the stochastic variants can run on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curvopt_core::problem::{
    Dataset, FiniteSum, FiniteSumObjective, FiniteSumProblem, LinearLeastSquares, Problem, QuadraticFiniteSum,
    TwoLayerNetwork, REGISTRY_SEED,
};

/// Built-in finite sums: name and one-line summary.
pub const FINITE_SUMS: &[(&str, &str)] = &[
    ("quadratic_finite_sum", "10-D quadratic, N = 20 indefinite components with SPD mean"),
    ("network_regression", "two-layer tanh network least squares, N = 40, n = 12"),
    ("teacher_network", "two-layer tanh network least squares, N = 500, n = 80"),
];

/// One concrete finite sum.
#[derive(Debug, Clone)]
pub enum Source {
    Linear(FiniteSumProblem<LinearLeastSquares>),
    Network(FiniteSumProblem<TwoLayerNetwork>),
    Quadratic(QuadraticFiniteSum),
}

impl Source {
    pub fn by_name(name: &str) -> Option<Source> {
        match name {
            "quadratic_finite_sum" => Some(Source::Quadratic(quadratic_finite_sum())),
            "network_regression" => {
                let data = Dataset::synthetic_teacher(40, 2, 3, 0.05, REGISTRY_SEED);
                Some(Source::Network(FiniteSumProblem::new(name, data, TwoLayerNetwork::new(3))))
            }
            "teacher_network" => Some(Source::Network(teacher_network(REGISTRY_SEED))),
            _ => None,
        }
    }

    pub fn finite_sum(&self) -> &dyn FiniteSum {
        match self {
            Source::Linear(p) => p,
            Source::Network(p) => p,
            Source::Quadratic(q) => q,
        }
    }

    /// Full-batch objective with the given start.
    pub fn into_problem(self, start: Vec<f64>) -> Problem {
        match self {
            Source::Linear(p) => Problem::new(FiniteSumObjective::new(p).with_start(start)),
            Source::Network(p) => Problem::new(FiniteSumObjective::new(p).with_start(start)),
            Source::Quadratic(q) => Problem::new(FiniteSumObjective::new(q).with_start(start)),
        }
    }
}

/// Mean spectrum `1..=10`, component matrices perturbed by entries up to 3
/// in magnitude so that small batches see negative curvature.
pub fn quadratic_finite_sum() -> QuadraticFiniteSum {
    let spectrum: Vec<f64> = (1..=10).map(f64::from).collect();
    QuadraticFiniteSum::new(&spectrum, 20, 3.0, 1.0, REGISTRY_SEED).expect("fixed construction is valid")
}

/// 500 teacher-generated records with 8 features fitted by 8 tanh units.
pub fn teacher_network(seed: u64) -> FiniteSumProblem<TwoLayerNetwork> {
    let data = Dataset::synthetic_teacher(500, 8, 8, 0.05, seed);
    FiniteSumProblem::new("teacher_network", data, TwoLayerNetwork::new(8))
}

/// Uniform draw from `[-scale, scale]^n`, keyed by `seed`.
pub fn random_start(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
}
