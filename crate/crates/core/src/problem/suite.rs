//! Built-in analytic test problems with known minimizers, saddle points and
//! regions of negative curvature.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::finite_sum::{Dataset, FiniteSumObjective, FiniteSumProblem, TwoLayerNetwork};
use super::{LocalConstants, Objective};
use crate::linalg::{dot, SymMatrix};
use crate::math;

/// `f(x) = ||x||^2 / 2`
#[derive(Debug, Clone)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Self {
        Sphere { n }
    }
}

impl Objective for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
    fn hessian(&self, _x: &[f64]) -> SymMatrix {
        SymMatrix::identity(self.n)
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.n]]
    }
    fn local_constants(&self) -> Option<LocalConstants> {
        Some(LocalConstants { gradient: 1.0, hessian: 0.0 })
    }
    fn default_start(&self) -> Vec<f64> {
        vec![3.0; self.n]
    }
}

/// Chained Rosenbrock `sum 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    n: usize,
    name: String,
}

impl Rosenbrock {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "rosenbrock needs n >= 2");
        Rosenbrock { n, name: format!("rosenbrock{n}") }
    }
}

impl Objective for Rosenbrock {
    fn name(&self) -> &str {
        &self.name
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| {
                let a = w[1] - w[0] * w[0];
                let b = 1.0 - w[0];
                100.0 * a * a + b * b
            })
            .sum()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for i in 0..self.n - 1 {
            let a = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * a;
        }
        g
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        let mut h = SymMatrix::zeros(self.n);
        for i in 0..self.n - 1 {
            h.add_sym(i, i, 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0);
            h.add_sym(i, i + 1, -400.0 * x[i]);
            h.add_sym(i + 1, i + 1, 200.0);
        }
        h
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        vec![vec![1.0; self.n]]
    }
    fn default_start(&self) -> Vec<f64> {
        (0..self.n).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect()
    }
}

/// `f(x, y) = (x^2 - 1)^2 / 4 + y^2 / 2`: strict saddle at the origin,
/// minimizers at `(+-1, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct QuarticSaddle;

impl QuarticSaddle {
    /// Constants valid on `|x| <= 1.5`: `L = max(3 x^2 - 1, 1) = 5.75` and
    /// `sigma = 6 |x| = 9`. The level set `f <= 1/4` lies inside this strip.
    pub const LOCAL: LocalConstants = LocalConstants { gradient: 5.75, hessian: 9.0 };
}

impl Objective for QuarticSaddle {
    fn name(&self) -> &str {
        "quartic_saddle"
    }
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        let a = x[0] * x[0] - 1.0;
        0.25 * a * a + 0.5 * x[1] * x[1]
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] * (x[0] * x[0] - 1.0), x[1]]
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        SymMatrix::from_diagonal(&[3.0 * x[0] * x[0] - 1.0, 1.0])
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![-1.0, 0.0]]
    }
    fn local_constants(&self) -> Option<LocalConstants> {
        Some(Self::LOCAL)
    }
    fn default_start(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
}

/// Monkey saddle `x^3 - 3 x y^2` made bounded below by `(x^2 + y^2)^2`.
///
/// In polar form `f = r^3 cos(3 phi) + r^4 >= r^4 - r^3`, minimized at
/// `r = 3/4` with value `-27/256` on the three rays `cos(3 phi) = -1`.
#[derive(Debug, Clone, Copy)]
pub struct MonkeySaddle;

impl Objective for MonkeySaddle {
    fn name(&self) -> &str {
        "monkey_saddle"
    }
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        let r2 = a * a + b * b;
        a * a * a - 3.0 * a * b * b + r2 * r2
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0], x[1]);
        let r2 = a * a + b * b;
        vec![3.0 * a * a - 3.0 * b * b + 4.0 * a * r2, -6.0 * a * b + 4.0 * b * r2]
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        let (a, b) = (x[0], x[1]);
        let mut h = SymMatrix::zeros(2);
        h.set_sym(0, 0, 6.0 * a + 12.0 * a * a + 4.0 * b * b);
        h.set_sym(0, 1, -6.0 * b + 8.0 * a * b);
        h.set_sym(1, 1, -6.0 * a + 4.0 * a * a + 12.0 * b * b);
        h
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(-27.0 / 256.0)
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        let c = 3.0 * math::sqrt(3.0) / 8.0;
        vec![vec![-0.75, 0.0], vec![0.375, c], vec![0.375, -c]]
    }
    fn default_start(&self) -> Vec<f64> {
        vec![0.2, 0.05]
    }
}

/// Himmelblau's function: four global minimizers, one local maximizer and
/// four saddle points.
#[derive(Debug, Clone, Copy)]
pub struct Himmelblau;

impl Objective for Himmelblau {
    fn name(&self) -> &str {
        "himmelblau"
    }
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        let a = x[0] * x[0] + x[1] - 11.0;
        let b = x[0] + x[1] * x[1] - 7.0;
        a * a + b * b
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let a = x[0] * x[0] + x[1] - 11.0;
        let b = x[0] + x[1] * x[1] - 7.0;
        vec![4.0 * x[0] * a + 2.0 * b, 2.0 * a + 4.0 * x[1] * b]
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        let a = x[0] * x[0] + x[1] - 11.0;
        let b = x[0] + x[1] * x[1] - 7.0;
        let mut h = SymMatrix::zeros(2);
        h.set_sym(0, 0, 4.0 * a + 8.0 * x[0] * x[0] + 2.0);
        h.set_sym(0, 1, 4.0 * (x[0] + x[1]));
        h.set_sym(1, 1, 2.0 + 4.0 * b + 8.0 * x[1] * x[1]);
        h
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        vec![
            vec![3.0, 2.0],
            vec![-2.805118086952745, 3.131312518250573],
            vec![-3.779310253377747, -3.283185991286170],
            vec![3.584428340330492, -1.848126526964404],
        ]
    }
    fn default_start(&self) -> Vec<f64> {
        vec![-0.3, -0.9]
    }
}

/// Beale's function, minimizer `(3, 1/2)`.
#[derive(Debug, Clone, Copy)]
pub struct Beale;

const BEALE_C: [f64; 3] = [1.5, 2.25, 2.625];

impl Beale {
    // Residual t_p = c_p - x + x y^p (p = 1, 2, 3) with its derivatives
    // (t, t_x, t_y, t_xy, t_yy); t_xx is zero.
    fn residuals(x: &[f64]) -> [[f64; 5]; 3] {
        let (a, b) = (x[0], x[1]);
        let mut out = [[0.0; 5]; 3];
        for (k, c) in BEALE_C.iter().enumerate() {
            let p = (k + 1) as f64;
            let yp = math::powi(b, k as u32 + 1);
            let yp1 = math::powi(b, k as u32);
            let yp2 = if k >= 1 { math::powi(b, k as u32 - 1) } else { 0.0 };
            out[k] = [c - a + a * yp, yp - 1.0, p * a * yp1, p * yp1, p * (p - 1.0) * a * yp2];
        }
        out
    }
}

impl Objective for Beale {
    fn name(&self) -> &str {
        "beale"
    }
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        Self::residuals(x).iter().map(|r| r[0] * r[0]).sum()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; 2];
        for r in Self::residuals(x) {
            g[0] += 2.0 * r[0] * r[1];
            g[1] += 2.0 * r[0] * r[2];
        }
        g
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        let mut h = SymMatrix::zeros(2);
        for r in Self::residuals(x) {
            h.add_sym(0, 0, 2.0 * r[1] * r[1]);
            h.add_sym(0, 1, 2.0 * (r[1] * r[2] + r[0] * r[3]));
            h.add_sym(1, 1, 2.0 * (r[2] * r[2] + r[0] * r[4]));
        }
        h
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        vec![vec![3.0, 0.5]]
    }
    fn default_start(&self) -> Vec<f64> {
        vec![1.0, 1.0]
    }
}

/// `f(x) = (x - c)^T Q (x - c) / 2` with `Q = U diag(spectrum) U^T` and `U`
/// a seeded product of Householder reflections.
#[derive(Debug, Clone)]
pub struct RandomQuadratic {
    q: SymMatrix,
    spectrum: Vec<f64>,
    center: Vec<f64>,
}

impl RandomQuadratic {
    pub fn new(spectrum: &[f64], seed: u64) -> Self {
        let n = spectrum.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_orthogonal(n, &mut rng);
        let mut q = SymMatrix::zeros(n);
        for (k, lam) in spectrum.iter().enumerate() {
            let col: Vec<f64> = (0..n).map(|i| u[i * n + k]).collect();
            q.add_outer(*lam, &col);
        }
        q.symmetrize();
        let center = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        RandomQuadratic { q, spectrum: spectrum.to_vec(), center }
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.q
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn offset(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(a, b)| a - b).collect()
    }
}

/// Orthogonal `n x n` matrix (row-major) as a product of `n` reflections.
pub(crate) fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        u[i * n + i] = 1.0;
    }
    for _ in 0..n {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vv = dot(&v, &v);
        if vv == 0.0 {
            continue;
        }
        // U <- U (I - 2 v v^T / v^T v)
        for row in 0..n {
            let r = &mut u[row * n..(row + 1) * n];
            let c = 2.0 * dot(r, &v) / vv;
            for (rj, vj) in r.iter_mut().zip(&v) {
                *rj -= c * vj;
            }
        }
    }
    u
}

impl Objective for RandomQuadratic {
    fn name(&self) -> &str {
        "random_quadratic"
    }
    fn dimension(&self) -> usize {
        self.spectrum.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let y = self.offset(x);
        0.5 * self.q.quad_form(&y)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.q.mul_vec(&self.offset(x))
    }
    fn hessian(&self, _x: &[f64]) -> SymMatrix {
        self.q.clone()
    }
    fn lower_bound(&self) -> Option<f64> {
        self.spectrum.iter().all(|l| *l >= 0.0).then_some(0.0)
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        if self.spectrum.iter().all(|l| *l > 0.0) {
            vec![self.center.clone()]
        } else {
            Vec::new()
        }
    }
    fn local_constants(&self) -> Option<LocalConstants> {
        let l = self.spectrum.iter().fold(0.0_f64, |m, v| m.max(math::abs(*v)));
        Some(LocalConstants { gradient: l, hessian: 0.0 })
    }
    fn default_start(&self) -> Vec<f64> {
        self.center.iter().map(|c| c + 2.0).collect()
    }
}

/// `sum_i (x_i^2 / 10 + cos 2 x_i) + (1/2) sum_i sin x_i sin x_{i+1}`.
///
/// Each coordinate sees a strongly concave bump at zero; the quadratic term
/// keeps the function bounded below by `-n - (n - 1) / 2`.
#[derive(Debug, Clone)]
pub struct TrigSum {
    n: usize,
}

impl TrigSum {
    pub fn new(n: usize) -> Self {
        TrigSum { n }
    }
}

impl Objective for TrigSum {
    fn name(&self) -> &str {
        "trig_sum"
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        let sep: f64 = x.iter().map(|t| 0.1 * t * t + math::cos(2.0 * t)).sum();
        let cpl: f64 = x.windows(2).map(|w| math::sin(w[0]) * math::sin(w[1])).sum();
        sep + 0.5 * cpl
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut nb = 0.0;
                if i > 0 {
                    nb += math::sin(x[i - 1]);
                }
                if i + 1 < n {
                    nb += math::sin(x[i + 1]);
                }
                0.2 * x[i] - 2.0 * math::sin(2.0 * x[i]) + 0.5 * math::cos(x[i]) * nb
            })
            .collect()
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        let n = self.n;
        let mut h = SymMatrix::zeros(n);
        for i in 0..n {
            let mut nb = 0.0;
            if i > 0 {
                nb += math::sin(x[i - 1]);
            }
            if i + 1 < n {
                nb += math::sin(x[i + 1]);
                h.set_sym(i, i + 1, 0.5 * math::cos(x[i]) * math::cos(x[i + 1]));
            }
            h.set_sym(i, i, 0.2 - 4.0 * math::cos(2.0 * x[i]) - 0.5 * math::sin(x[i]) * nb);
        }
        h
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(-(self.n as f64) - 0.5 * (self.n.saturating_sub(1)) as f64)
    }
    fn default_start(&self) -> Vec<f64> {
        (0..self.n).map(|i| 0.05 * (i as f64 + 1.0)).collect()
    }
}

/// Styblinski-Tang `sum (x^4 - 16 x^2 + 5 x) / 2`.
#[derive(Debug, Clone)]
pub struct StyblinskiTang {
    n: usize,
}

const ST_MINIMIZER: f64 = -2.903534027771178;
// Per-coordinate minimum value, rounded down.
const ST_MIN_PER_COORD: f64 = -39.16616570377143;

impl StyblinskiTang {
    pub fn new(n: usize) -> Self {
        StyblinskiTang { n }
    }
}

impl Objective for StyblinskiTang {
    fn name(&self) -> &str {
        "styblinski_tang"
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().map(|t| t * t * t * t - 16.0 * t * t + 5.0 * t).sum::<f64>()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|t| 2.0 * t * t * t - 16.0 * t + 2.5).collect()
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        let d: Vec<f64> = x.iter().map(|t| 6.0 * t * t - 16.0).collect();
        SymMatrix::from_diagonal(&d)
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(ST_MIN_PER_COORD * self.n as f64 - 1e-12)
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        vec![vec![ST_MINIMIZER; self.n]]
    }
    fn default_start(&self) -> Vec<f64> {
        vec![0.3; self.n]
    }
}

/// A name in the built-in registry.
#[derive(Clone, Copy)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: fn() -> Box<dyn Objective>,
}

impl core::fmt::Debug for RegistryEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RegistryEntry").field("name", &self.name).finish()
    }
}

/// Seed of the registry's `random_quadratic` and `network_regression`.
pub const REGISTRY_SEED: u64 = 20_180_301;

fn network_regression() -> Box<dyn Objective> {
    let data = Dataset::synthetic_teacher(40, 2, 3, 0.05, REGISTRY_SEED);
    let problem = FiniteSumProblem::new("network_regression", data, TwoLayerNetwork::new(3));
    Box::new(FiniteSumObjective::new(problem).with_start_scale(0.1, REGISTRY_SEED))
}

const REGISTRY: &[RegistryEntry] = &[
    RegistryEntry { name: "sphere", summary: "||x||^2/2, n = 2", build: || Box::new(Sphere::new(2)) },
    RegistryEntry { name: "rosenbrock2", summary: "Rosenbrock, n = 2", build: || Box::new(Rosenbrock::new(2)) },
    RegistryEntry {
        name: "rosenbrock10",
        summary: "chained Rosenbrock, n = 10",
        build: || Box::new(Rosenbrock::new(10)),
    },
    RegistryEntry {
        name: "quartic_saddle",
        summary: "(x^2-1)^2/4 + y^2/2, strict saddle at the origin",
        build: || Box::new(QuarticSaddle),
    },
    RegistryEntry {
        name: "monkey_saddle",
        summary: "x^3 - 3xy^2 + (x^2+y^2)^2",
        build: || Box::new(MonkeySaddle),
    },
    RegistryEntry { name: "himmelblau", summary: "Himmelblau, four minimizers", build: || Box::new(Himmelblau) },
    RegistryEntry { name: "beale", summary: "Beale, minimizer (3, 1/2)", build: || Box::new(Beale) },
    RegistryEntry {
        name: "random_quadratic",
        summary: "SPD quadratic, n = 10, spectrum 1..10",
        build: || {
            let spectrum: Vec<f64> = (1..=10).map(|k| k as f64).collect();
            Box::new(RandomQuadratic::new(&spectrum, REGISTRY_SEED))
        },
    },
    RegistryEntry {
        name: "trig_sum",
        summary: "sum x^2/10 + cos 2x with sine coupling, n = 4",
        build: || Box::new(TrigSum::new(4)),
    },
    RegistryEntry {
        name: "styblinski_tang",
        summary: "Styblinski-Tang, n = 2",
        build: || Box::new(StyblinskiTang::new(2)),
    },
    RegistryEntry {
        name: "network_regression",
        summary: "two-layer tanh network least squares, N = 40, n = 12",
        build: network_regression,
    },
];

pub fn registry() -> &'static [RegistryEntry] {
    REGISTRY
}

pub fn build(name: &str) -> Option<Box<dyn Objective>> {
    REGISTRY.iter().find(|e| e.name == name).map(|e| (e.build)())
}

/// `count` starting points: the problem's default start followed by
/// seeded uniform perturbations of it with half-width `radius`.
pub fn starting_points(objective: &dyn Objective, count: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let x0 = objective.default_start();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        out.push(x0.clone());
    }
    for _ in 1..count {
        out.push(x0.iter().map(|v| v + radius * rng.gen_range(-1.0..1.0)).collect());
    }
    out
}
