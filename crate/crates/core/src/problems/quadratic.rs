use rand::Rng;

use super::{BoxSpace, Problem};

/// `U(x) = sum_i x_i^2` on a box. The workhorse for exact-oracle tests.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    space: BoxSpace,
}

impl Quadratic {
    pub fn new(space: BoxSpace) -> Self {
        Self { space }
    }

    pub fn space(&self) -> &BoxSpace {
        &self.space
    }
}

impl Problem for Quadratic {
    type Gene = f64;

    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.space.sample(rng)
    }

    fn constrain(&self, x: &mut [f64]) -> bool {
        self.space.contains(x)
    }

    fn bounds(&self) -> Option<(&[f64], &[f64])> {
        Some((self.space.lower(), self.space.upper()))
    }
}
