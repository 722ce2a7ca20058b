//! Benchmark energies and their sample spaces.

mod ising;
mod mixture;
mod protein;
mod quadratic;
mod rastrigin;

use rand::Rng;

pub use ising::{load_pgm, load_text_grid, BinaryImage, IsingRestoration, IsingStats};
pub use mixture::{Component, GaussianMixture};
pub use protein::{fibonacci_sequence, AbModel, AbTerms, Monomer, Space};
pub use quadratic::Quadratic;
pub use rastrigin::{rastrigin, RotatedRastrigin, RotationMatrix};

use crate::moves::Gene;

/// An energy function together with its sample space.
pub trait Problem: Send + Sync {
    type Gene: Gene;

    /// Number of coordinates of a point.
    fn dim(&self) -> usize;

    /// Energy `U(x)`. Must be pure.
    fn energy(&self, x: &[Self::Gene]) -> f64;

    /// A point drawn uniformly from the sample space.
    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Self::Gene>;

    /// Map a proposal back into the sample space, returning `false` when it
    /// lies outside and must be rejected without evaluation.
    fn constrain(&self, _x: &mut [Self::Gene]) -> bool {
        true
    }

    /// Energy change caused by flipping coordinate `site`, if the problem
    /// can compute it locally.
    fn flip_delta(&self, _x: &[Self::Gene], _site: usize) -> Option<f64> {
        None
    }

    /// Axis-aligned bounds of a continuous space.
    fn bounds(&self) -> Option<(&[f64], &[f64])> {
        None
    }
}

/// Axis-aligned box `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoxSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> crate::Result<Self> {
        if lower.len() != upper.len() {
            return Err(crate::Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.is_empty() {
            return Err(crate::Error::InvalidProblem("box needs at least one dimension".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(crate::Error::InvalidProblem(
                "box bounds must be finite with lower < upper".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    pub fn cube(d: usize, lo: f64, hi: f64) -> crate::Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + (u - l) * rng.random::<f64>())
            .collect()
    }
}
