//! Objectives of the form `f(x) = (1/N) sum_i f_i(x)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::suite::random_orthogonal;
use super::{LocalConstants, Objective};
use crate::linalg::{symmetric_eigen, Cholesky, SymMatrix};
use crate::math;
use crate::{Error, Result};

/// A finite sum of twice differentiable components.
pub trait FiniteSum: Send + Sync {
    fn name(&self) -> &str;
    fn component_count(&self) -> usize;
    fn dimension(&self) -> usize;

    /// Value of component `i` at `x`; its gradient and Hessian are *added*
    /// into `grad` / `hess` when those are supplied.
    fn accumulate(
        &self,
        x: &[f64],
        i: usize,
        grad: Option<&mut [f64]>,
        hess: Option<&mut SymMatrix>,
    ) -> f64;

    fn lower_bound(&self) -> Option<f64> {
        None
    }

    fn local_constants(&self) -> Option<LocalConstants> {
        None
    }

    /// `(f_i(x), grad f_i(x), hess f_i(x))`
    fn component(&self, x: &[f64], i: usize) -> (f64, Vec<f64>, SymMatrix) {
        let mut g = vec![0.0; self.dimension()];
        let mut h = SymMatrix::zeros(self.dimension());
        let f = self.accumulate(x, i, Some(&mut g), Some(&mut h));
        (f, g, h)
    }

    fn mean_value(&self, x: &[f64], indices: &[usize]) -> f64 {
        let total: f64 = indices.iter().map(|&i| self.accumulate(x, i, None, None)).sum();
        total / indices.len() as f64
    }

    fn mean_value_gradient(&self, x: &[f64], indices: &[usize]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; self.dimension()];
        let mut total = 0.0;
        for &i in indices {
            total += self.accumulate(x, i, Some(&mut g), None);
        }
        let m = indices.len() as f64;
        g.iter_mut().for_each(|v| *v /= m);
        (total / m, g)
    }

    fn mean_hessian(&self, x: &[f64], indices: &[usize]) -> SymMatrix {
        let mut h = SymMatrix::zeros(self.dimension());
        for &i in indices {
            self.accumulate(x, i, None, Some(&mut h));
        }
        h.scale(1.0 / indices.len() as f64);
        h
    }

    fn all_indices(&self) -> Vec<usize> {
        (0..self.component_count()).collect()
    }
}

/// Feature/label records with a uniform feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl Dataset {
    /// `features` is row-major, `labels.len()` rows of `feature_dim` each.
    pub fn new(feature_dim: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Schema("dataset has no records".into()));
        }
        if feature_dim == 0 {
            return Err(Error::Schema("dataset has no feature columns".into()));
        }
        if features.len() != feature_dim * labels.len() {
            return Err(Error::Schema(alloc::format!(
                "{} feature values for {} records of dimension {}",
                features.len(),
                labels.len(),
                feature_dim
            )));
        }
        if !features.iter().chain(&labels).all(|v| v.is_finite()) {
            return Err(Error::Schema("non-finite value in dataset".into()));
        }
        Ok(Dataset { feature_dim, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn record(&self, i: usize) -> (&[f64], f64) {
        let p = self.feature_dim;
        (&self.features[i * p..(i + 1) * p], self.labels[i])
    }

    /// Regression data labelled by a random two-layer tanh "teacher" network
    /// plus uniform noise of half-width `noise`. Features are uniform on
    /// `[-1, 1]^p`.
    pub fn synthetic_teacher(records: usize, feature_dim: usize, hidden: usize, noise: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let teacher = TwoLayerNetwork::new(hidden);
        let params: Vec<f64> = (0..teacher.parameter_count(feature_dim))
            .map(|_| 1.5 * rng.gen_range(-1.0..1.0))
            .collect();
        let mut features = Vec::with_capacity(records * feature_dim);
        let mut labels = Vec::with_capacity(records);
        for _ in 0..records {
            let a: Vec<f64> = (0..feature_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = teacher.predict(&params, &a) + noise * rng.gen_range(-1.0..1.0);
            features.extend_from_slice(&a);
            labels.push(y);
        }
        Dataset { feature_dim, features, labels }
    }
}

/// Loss of a parametric model on one record.
pub trait ComponentModel: Send + Sync {
    fn parameter_count(&self, feature_dim: usize) -> usize;

    /// Loss at `params` on `(features, label)`, adding its gradient and
    /// Hessian into `grad` / `hess` when supplied.
    fn accumulate(
        &self,
        params: &[f64],
        features: &[f64],
        label: f64,
        grad: Option<&mut [f64]>,
        hess: Option<&mut SymMatrix>,
    ) -> f64;
}

/// `(w^T a + b - y)^2 / 2`; parameters `(w, b)`. Convex.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearLeastSquares;

impl ComponentModel for LinearLeastSquares {
    fn parameter_count(&self, feature_dim: usize) -> usize {
        feature_dim + 1
    }

    fn accumulate(
        &self,
        params: &[f64],
        features: &[f64],
        label: f64,
        grad: Option<&mut [f64]>,
        hess: Option<&mut SymMatrix>,
    ) -> f64 {
        let p = features.len();
        let pred: f64 = params[..p].iter().zip(features).map(|(w, a)| w * a).sum::<f64>() + params[p];
        let e = pred - label;
        let jac = |k: usize| if k < p { features[k] } else { 1.0 };
        if let Some(g) = grad {
            for (k, gk) in g.iter_mut().enumerate() {
                *gk += e * jac(k);
            }
        }
        if let Some(h) = hess {
            for i in 0..=p {
                for j in i..=p {
                    h.add_sym(i, j, jac(i) * jac(j));
                }
            }
        }
        0.5 * e * e
    }
}

/// Scalar-output network `r(a) = sum_j v_j tanh(w_j^T a + b_j)` with squared
/// loss `(r(a) - y)^2 / 2`.
///
/// Parameter layout: for each hidden unit `j`, the block `(w_j, b_j)` of
/// length `p + 1`; then the output weights `v`.
#[derive(Debug, Clone, Copy)]
pub struct TwoLayerNetwork {
    hidden: usize,
}

impl TwoLayerNetwork {
    pub fn new(hidden: usize) -> Self {
        TwoLayerNetwork { hidden }
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn predict(&self, params: &[f64], features: &[f64]) -> f64 {
        let p1 = features.len() + 1;
        let v = &params[self.hidden * p1..];
        (0..self.hidden)
            .map(|j| v[j] * math::tanh(pre_activation(&params[j * p1..(j + 1) * p1], features)))
            .sum()
    }
}

#[inline]
fn pre_activation(wb: &[f64], a: &[f64]) -> f64 {
    let p = a.len();
    wb[..p].iter().zip(a).map(|(w, x)| w * x).sum::<f64>() + wb[p]
}

impl ComponentModel for TwoLayerNetwork {
    fn parameter_count(&self, feature_dim: usize) -> usize {
        self.hidden * (feature_dim + 2)
    }

    fn accumulate(
        &self,
        params: &[f64],
        features: &[f64],
        label: f64,
        grad: Option<&mut [f64]>,
        hess: Option<&mut SymMatrix>,
    ) -> f64 {
        let h = self.hidden;
        let p1 = features.len() + 1;
        let v_off = h * p1;
        let v = &params[v_off..];
        let aug = |k: usize| if k + 1 < p1 { features[k] } else { 1.0 };

        // t_j, t'_j, t''_j
        let mut t = vec![0.0; h];
        let mut dt = vec![0.0; h];
        let mut ddt = vec![0.0; h];
        for j in 0..h {
            let tj = math::tanh(pre_activation(&params[j * p1..(j + 1) * p1], features));
            t[j] = tj;
            dt[j] = 1.0 - tj * tj;
            ddt[j] = -2.0 * tj * dt[j];
        }
        let e = t.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - label;

        // J = grad of the network output r
        let n = self.parameter_count(features.len());
        let mut jac = vec![0.0; n];
        for j in 0..h {
            for k in 0..p1 {
                jac[j * p1 + k] = v[j] * dt[j] * aug(k);
            }
            jac[v_off + j] = t[j];
        }

        if let Some(g) = grad {
            for (gk, jk) in g.iter_mut().zip(&jac) {
                *gk += e * jk;
            }
        }
        if let Some(hm) = hess {
            // J J^T + e * hess(r); hess(r) couples only (w_j, w_j) and (w_j, v_j).
            for a in 0..n {
                if jac[a] == 0.0 {
                    continue;
                }
                for b in a..n {
                    hm.add_sym(a, b, jac[a] * jac[b]);
                }
            }
            for j in 0..h {
                let c = e * v[j] * ddt[j];
                for k in 0..p1 {
                    for l in k..p1 {
                        hm.add_sym(j * p1 + k, j * p1 + l, c * aug(k) * aug(l));
                    }
                    hm.add_sym(j * p1 + k, v_off + j, e * dt[j] * aug(k));
                }
            }
        }
        0.5 * e * e
    }
}

/// A dataset paired with a per-record model.
#[derive(Debug, Clone)]
pub struct FiniteSumProblem<M> {
    name: String,
    dataset: Dataset,
    model: M,
}

impl<M: ComponentModel> FiniteSumProblem<M> {
    pub fn new(name: impl Into<String>, dataset: Dataset, model: M) -> Self {
        FiniteSumProblem { name: name.into(), dataset, model }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn model(&self) -> &M {
        &self.model
    }
}

impl<M: ComponentModel> FiniteSum for FiniteSumProblem<M> {
    fn name(&self) -> &str {
        &self.name
    }

    fn component_count(&self) -> usize {
        self.dataset.len()
    }

    fn dimension(&self) -> usize {
        self.model.parameter_count(self.dataset.feature_dim())
    }

    fn accumulate(&self, x: &[f64], i: usize, grad: Option<&mut [f64]>, hess: Option<&mut SymMatrix>) -> f64 {
        let (a, y) = self.dataset.record(i);
        self.model.accumulate(x, a, y, grad, hess)
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Components `f_i(x) = x^T A_i x / 2 + b_i^T x` whose mean matrix has a
/// prescribed (positive) spectrum. The `A_i` are perturbed by centered
/// symmetric noise, so individual or mini-batch Hessians may be indefinite
/// while the full objective is strongly convex.
#[derive(Debug, Clone)]
pub struct QuadraticFiniteSum {
    matrices: Vec<SymMatrix>,
    linear: Vec<Vec<f64>>,
    mean_matrix: SymMatrix,
    minimizer: Vec<f64>,
    f_inf: f64,
    lipschitz: f64,
}

impl QuadraticFiniteSum {
    pub fn new(spectrum: &[f64], components: usize, matrix_noise: f64, linear_noise: f64, seed: u64) -> Result<Self> {
        let n = spectrum.len();
        if components == 0 || n == 0 {
            return Err(Error::config("quadratic finite sum needs n >= 1 and N >= 1"));
        }
        if spectrum.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::config("mean spectrum must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_orthogonal(n, &mut rng);
        let mut mean = SymMatrix::zeros(n);
        for (k, lam) in spectrum.iter().enumerate() {
            let col: Vec<f64> = (0..n).map(|i| u[i * n + k]).collect();
            mean.add_outer(*lam, &col);
        }
        mean.symmetrize();
        let b_mean: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let mut noise_m: Vec<SymMatrix> = Vec::with_capacity(components);
        let mut noise_b: Vec<Vec<f64>> = Vec::with_capacity(components);
        for _ in 0..components {
            let mut e = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    e.set_sym(i, j, matrix_noise * rng.gen_range(-1.0..1.0));
                }
            }
            noise_m.push(e);
            noise_b.push((0..n).map(|_| linear_noise * rng.gen_range(-1.0..1.0)).collect());
        }
        // Center the noise so the component mean is the prescribed model.
        let mut avg_m = SymMatrix::zeros(n);
        let mut avg_b = vec![0.0; n];
        for (e, b) in noise_m.iter().zip(&noise_b) {
            avg_m.add_scaled(1.0 / components as f64, e);
            crate::linalg::axpy(1.0 / components as f64, b, &mut avg_b);
        }
        let matrices: Vec<SymMatrix> = noise_m
            .into_iter()
            .map(|mut e| {
                e.add_scaled(-1.0, &avg_m);
                e.add_scaled(1.0, &mean);
                e.symmetrize();
                e
            })
            .collect();
        let linear: Vec<Vec<f64>> = noise_b
            .into_iter()
            .map(|b| b.iter().zip(&avg_b).zip(&b_mean).map(|((bi, ai), mi)| bi - ai + mi).collect())
            .collect();

        Self::from_components(matrices, linear)
    }

    /// Components given explicitly. The mean matrix must be positive
    /// definite.
    pub fn from_components(matrices: Vec<SymMatrix>, linear: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrices.first().map_or(0, SymMatrix::dim);
        if matrices.is_empty() || matrices.len() != linear.len() {
            return Err(Error::config("need one linear term per component matrix"));
        }
        if matrices.iter().any(|m| m.dim() != n) || linear.iter().any(|b| b.len() != n) {
            return Err(Error::config("component dimensions differ"));
        }
        let mut this = QuadraticFiniteSum {
            matrices,
            linear,
            mean_matrix: SymMatrix::zeros(n),
            minimizer: Vec::new(),
            f_inf: 0.0,
            lipschitz: 0.0,
        };
        let all = this.all_indices();
        let zero = vec![0.0; n];
        let realized = this.mean_hessian(&zero, &all);
        let (_, b_bar) = this.mean_value_gradient(&zero, &all);
        let chol = Cholesky::factor(&realized)?;
        let minimizer: Vec<f64> = chol.solve(&b_bar).iter().map(|v| -v).collect();
        let f_min = this.mean_value(&minimizer, &all);
        this.lipschitz = symmetric_eigen(&realized).max();
        this.mean_matrix = realized;
        this.minimizer = minimizer;
        this.f_inf = f_min - 1e-12 * f_min.abs().max(1.0);
        Ok(this)
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn mean_matrix(&self) -> &SymMatrix {
        &self.mean_matrix
    }

    /// Largest eigenvalue of the mean matrix: the gradient Lipschitz
    /// constant of the full objective.
    pub fn gradient_lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

impl FiniteSum for QuadraticFiniteSum {
    fn name(&self) -> &str {
        "quadratic_finite_sum"
    }

    fn component_count(&self) -> usize {
        self.matrices.len()
    }

    fn dimension(&self) -> usize {
        self.mean_matrix.dim()
    }

    fn accumulate(&self, x: &[f64], i: usize, grad: Option<&mut [f64]>, hess: Option<&mut SymMatrix>) -> f64 {
        let a = &self.matrices[i];
        let b = &self.linear[i];
        let ax = a.mul_vec(x);
        let f = 0.5 * crate::linalg::dot(x, &ax) + crate::linalg::dot(b, x);
        if let Some(g) = grad {
            for ((gk, axk), bk) in g.iter_mut().zip(&ax).zip(b) {
                *gk += axk + bk;
            }
        }
        if let Some(h) = hess {
            h.add_scaled(1.0, a);
        }
        f
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(self.f_inf)
    }

    fn local_constants(&self) -> Option<LocalConstants> {
        Some(LocalConstants { gradient: self.lipschitz, hessian: 0.0 })
    }
}

/// Full-batch view of a [`FiniteSum`] as an [`Objective`].
#[derive(Debug, Clone)]
pub struct FiniteSumObjective<S> {
    source: S,
    indices: Vec<usize>,
    start: Vec<f64>,
}

impl<S: FiniteSum> FiniteSumObjective<S> {
    pub fn new(source: S) -> Self {
        let indices = source.all_indices();
        let start = vec![0.0; source.dimension()];
        FiniteSumObjective { source, indices, start }
    }

    /// Default start drawn uniformly from `[-scale, scale]^n`.
    pub fn with_start_scale(mut self, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        self.start = (0..self.source.dimension()).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        self
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.start = start;
        self
    }

    pub fn source(&self) -> &S {
        &self.source
    }
}

impl<S: FiniteSum> Objective for FiniteSumObjective<S> {
    fn name(&self) -> &str {
        self.source.name()
    }
    fn dimension(&self) -> usize {
        self.source.dimension()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.source.mean_value(x, &self.indices)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.source.mean_value_gradient(x, &self.indices).1
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        self.source.mean_hessian(x, &self.indices)
    }
    fn lower_bound(&self) -> Option<f64> {
        self.source.lower_bound()
    }
    fn local_constants(&self) -> Option<LocalConstants> {
        self.source.local_constants()
    }
    fn default_start(&self) -> Vec<f64> {
        self.start.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_network() -> FiniteSumProblem<TwoLayerNetwork> {
        FiniteSumProblem::new("tiny", Dataset::synthetic_teacher(5, 2, 2, 0.1, 3), TwoLayerNetwork::new(2))
    }

    #[test]
    fn dataset_rejects_empty() {
        assert!(matches!(Dataset::new(2, vec![], vec![]), Err(Error::Schema(_))));
    }

    #[test]
    fn dataset_rejects_ragged() {
        assert!(matches!(Dataset::new(2, vec![1.0, 2.0, 3.0], vec![1.0, 2.0]), Err(Error::Schema(_))));
    }

    #[test]
    fn full_objective_is_component_mean() {
        let p = tiny_network();
        let x: Vec<f64> = (0..p.dimension()).map(|k| 0.1 * k as f64 - 0.3).collect();
        let obj = FiniteSumObjective::new(p.clone());
        let mut f = 0.0;
        let mut g = vec![0.0; p.dimension()];
        let mut h = SymMatrix::zeros(p.dimension());
        for i in 0..p.component_count() {
            let (fi, gi, hi) = p.component(&x, i);
            f += fi;
            crate::linalg::axpy(1.0, &gi, &mut g);
            h.add_scaled(1.0, &hi);
        }
        let nn = p.component_count() as f64;
        assert!((obj.value(&x) - f / nn).abs() <= 1e-12 * (f / nn).abs());
        for (a, b) in obj.gradient(&x).iter().zip(&g) {
            assert!((a - b / nn).abs() <= 1e-12 * (b / nn).abs().max(1e-300));
        }
        let hm = obj.hessian(&x);
        for (a, b) in hm.as_slice().iter().zip(h.as_slice()) {
            assert!((a - b / nn).abs() <= 1e-12 * (b / nn).abs().max(1e-300));
        }
    }

    #[test]
    fn network_origin_is_a_strict_saddle() {
        let p = tiny_network();
        let obj = FiniteSumObjective::new(p);
        let zero = vec![0.0; obj.dimension()];
        assert!(crate::linalg::norm(&obj.gradient(&zero)) == 0.0);
        assert!(symmetric_eigen(&obj.hessian(&zero)).min() < 0.0);
    }

    #[test]
    fn quadratic_finite_sum_minimizer() {
        let q = QuadraticFiniteSum::new(&[1.0, 2.0, 5.0], 6, 1.0, 0.5, 11).unwrap();
        let obj = FiniteSumObjective::new(q.clone());
        let g = obj.gradient(q.minimizer());
        assert!(crate::linalg::norm(&g) < 1e-12);
        assert!((q.gradient_lipschitz() - 5.0).abs() < 1e-10);
        assert!(obj.value(q.minimizer()) >= q.lower_bound().unwrap());
    }
}
