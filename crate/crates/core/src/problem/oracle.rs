//! Seeded mini-batch estimates over a [`FiniteSum`].
//!
//! Every draw is keyed by `(seed, stream, iteration, draw)`, so a draw's
//! outcome does not depend on how many draws other streams consumed.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FiniteSum;
use crate::linalg::SymMatrix;
use crate::{Error, Result};

/// Independent random streams of an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stream {
    Gradient = 0,
    Hessian = 1,
    Omega = 2,
    Value = 3,
}

/// Sorted component indices of one mini-batch.
pub type Batch = Vec<usize>;

/// Estimates at a single point.
#[derive(Debug, Clone)]
pub struct Estimates {
    /// Mean component value over `gradient_batch`.
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SymMatrix,
    pub gradient_batch: Batch,
    pub hessian_batch: Batch,
}

/// Mini-batch oracle. Single consumer: draw counters mutate.
#[derive(Debug, Clone)]
pub struct StochasticOracle<'a, S: ?Sized> {
    source: &'a S,
    batch_size: usize,
    seed: u64,
    iteration: u64,
    draws: [u64; 4],
}

impl<'a, S: FiniteSum + ?Sized> StochasticOracle<'a, S> {
    pub fn new(source: &'a S, batch_size: usize, seed: u64) -> Result<Self> {
        let components = source.component_count();
        if batch_size > components {
            return Err(Error::BatchTooLarge { batch: batch_size, components });
        }
        if batch_size == 0 {
            return Err(Error::config("batch size must be positive"));
        }
        Ok(StochasticOracle { source, batch_size, seed, iteration: 0, draws: [0; 4] })
    }

    pub fn source(&self) -> &'a S {
        self.source
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_full_batch(&self) -> bool {
        self.batch_size == self.source.component_count()
    }

    /// Rekeys all streams to iteration `k`.
    pub fn begin_iteration(&mut self, k: u64) {
        self.iteration = k;
        self.draws = [0; 4];
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    fn rng(&self, stream: Stream, iteration: u64, draw: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
        key[16..24].copy_from_slice(&iteration.to_le_bytes());
        key[24..].copy_from_slice(&draw.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    fn next_rng(&mut self, stream: Stream) -> ChaCha8Rng {
        let slot = stream as usize;
        let draw = self.draws[slot];
        self.draws[slot] += 1;
        self.rng(stream, self.iteration, draw)
    }

    /// The batch keyed by `(stream, iteration, draw)`; does not advance.
    pub fn batch_at(&self, stream: Stream, iteration: u64, draw: u64) -> Batch {
        let n = self.source.component_count();
        if self.batch_size == n {
            return (0..n).collect();
        }
        let mut rng = self.rng(stream, iteration, draw);
        let mut batch = sample(&mut rng, n, self.batch_size).into_vec();
        batch.sort_unstable();
        batch
    }

    pub fn draw_batch(&mut self, stream: Stream) -> Batch {
        let slot = stream as usize;
        let draw = self.draws[slot];
        self.draws[slot] += 1;
        self.batch_at(stream, self.iteration, draw)
    }

    /// Uniform on `[-1, 1]`.
    pub fn draw_omega(&mut self) -> f64 {
        self.next_rng(Stream::Omega).gen_range(-1.0..=1.0)
    }

    /// Value and gradient over a fresh gradient batch, Hessian over an
    /// independent Hessian batch.
    pub fn sample_estimates(&mut self, x: &[f64]) -> Estimates {
        let gradient_batch = self.draw_batch(Stream::Gradient);
        let (value, gradient) = self.source.mean_value_gradient(x, &gradient_batch);
        let hessian_batch = self.draw_batch(Stream::Hessian);
        let hessian = self.source.mean_hessian(x, &hessian_batch);
        Estimates { value, gradient, hessian, gradient_batch, hessian_batch }
    }

    /// Value and gradient over a fresh gradient batch.
    pub fn sample_gradient(&mut self, x: &[f64]) -> (f64, Vec<f64>, Batch) {
        let batch = self.draw_batch(Stream::Gradient);
        let (f, g) = self.source.mean_value_gradient(x, &batch);
        (f, g, batch)
    }

    pub fn sample_hessian(&mut self, x: &[f64]) -> (SymMatrix, Batch) {
        let batch = self.draw_batch(Stream::Hessian);
        let h = self.source.mean_hessian(x, &batch);
        (h, batch)
    }

    /// Value estimate over a fresh batch of the value stream.
    pub fn sample_value(&mut self, x: &[f64]) -> f64 {
        let batch = self.draw_batch(Stream::Value);
        self.source.mean_value(x, &batch)
    }

    pub fn batch_value(&self, x: &[f64], batch: &[usize]) -> f64 {
        self.source.mean_value(x, batch)
    }

    pub fn batch_gradient(&self, x: &[f64], batch: &[usize]) -> Vec<f64> {
        self.source.mean_value_gradient(x, batch).1
    }

    pub fn batch_hessian(&self, x: &[f64], batch: &[usize]) -> SymMatrix {
        self.source.mean_hessian(x, batch)
    }

    /// Exact full-objective value and gradient (test mode).
    pub fn exact_value_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.source.mean_value_gradient(x, &self.source.all_indices())
    }
}
