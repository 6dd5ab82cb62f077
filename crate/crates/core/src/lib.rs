//! Smooth nonconvex minimization with descent and negative-curvature steps.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no I/O. It provides:
//!
//! * [`linalg`]: dense symmetric kernels (leftmost eigenpair, truncated CG
//!   with nonpositive-curvature detection, modified-Newton spectral shift).
//! * [`problem`]: the objective abstraction, a suite of analytic test
//!   problems, finite-sum problems and a seeded mini-batch oracle.
//! * [`deterministic`]: the fixed-stepsize two-step method and the dynamic
//!   method that picks between a descent step and a curvature step by
//!   comparing upper-bounding model reductions.
//! * [`stochastic`]: the two-step method with curvature noise and the
//!   stochastic dynamic method driven by truncated CG.
//!
//! File formats, configuration and the command line live in the companion
//! `curvopt` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod deterministic;
mod error;
pub mod linalg;
pub(crate) mod math;
pub mod problem;
pub mod stochastic;

pub use error::{Error, Result};
