//! Parallel and interacting stochastic approximation annealing.
//!
//! A population of annealed stochastic-approximation Monte Carlo chains
//! shares one energy partition and one self-adjusting vector of bias
//! weights. The crate also ships the single-chain, independent-parallel and
//! plain simulated-annealing baselines, a set of benchmark energies, and the
//! diagnostics used to check convergence and efficiency.

pub mod config;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod moves;
pub mod problems;
pub mod schedules;
pub mod target;

pub use error::{Error, Result};
