// SPDX-License-Identifier: MIT OR Apache-2.0

//! Nonparametric multiple change-point detection for multivariate series
//! using energy statistics.
//!
//! * [`energy`]: α-distances, the two-sample divergence Ê, its scaled form
//!   Q̂, and the (τ, κ) split scan.
//! * [`divisive`]: E-Divisive, hierarchical bisection with a permutation
//!   test as stopping rule.
//! * [`agglo`]: E-Agglomerative, adjacent-cluster merging that maximizes the
//!   goodness of fit Ŝ.
//! * [`eval`]: partitions and the Rand / adjusted Rand indices.
//! * [`simlab`]: simulation scenarios and the Monte Carlo study runner.
//! * [`cli`]: CSV ingestion, result documents, and the command line.
//!
//! Time indices are 1-based throughout, and a change point τ names the last
//! observation of the cluster to its left.

pub mod agglo;
pub mod cli;
pub mod divisive;
pub mod energy;
mod error;
pub mod eval;
pub mod rng;
pub mod simlab;

pub use error::{Error, Result};
