use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BoxSpace, Problem};
use crate::error::{Error, Result};

/// Rastrigin's function `10 d + sum_k (y_k^2 - 10 cos(2 pi y_k))`.
pub fn rastrigin(y: &[f64]) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    10.0 * y.len() as f64 + y.iter().map(|v| v * v - 10.0 * (two_pi * v).cos()).sum::<f64>()
}

/// Dense row-major orthogonal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix {
    d: usize,
    data: Vec<f64>,
    seed: Option<u64>,
}

impl RotationMatrix {
    pub fn identity(d: usize) -> Self {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        Self { d, data, seed: None }
    }

    /// Product of random-angle Givens rotations, one per axis pair, taken in
    /// a random order, then re-orthogonalized.
    pub fn salomon(d: usize, seed: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidProblem(format!(
                "a rotation needs d >= 2, got {d}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs: Vec<(usize, usize)> =
            (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        pairs.shuffle(&mut rng);
        let mut m = Self::identity(d);
        for (i, j) in pairs {
            let angle = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            let (s, c) = angle.sin_cos();
            for col in 0..d {
                let a = m.data[i * d + col];
                let b = m.data[j * d + col];
                m.data[i * d + col] = c * a - s * b;
                m.data[j * d + col] = s * a + c * b;
            }
        }
        m.reorthogonalize();
        m.seed = Some(seed);
        Ok(m)
    }

    /// Modified Gram-Schmidt over the rows.
    fn reorthogonalize(&mut self) {
        let d = self.d;
        for i in 0..d {
            for k in 0..i {
                let dot: f64 = (0..d).map(|c| self.data[i * d + c] * self.data[k * d + c]).sum();
                for c in 0..d {
                    self.data[i * d + c] -= dot * self.data[k * d + c];
                }
            }
            let norm = (0..d).map(|c| self.data[i * d + c].powi(2)).sum::<f64>().sqrt();
            for c in 0..d {
                self.data[i * d + c] /= norm;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.d + col]
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.d..(r + 1) * self.d];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.apply_into(x, &mut out);
        out
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.d;
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                let dot: f64 = (0..d).map(|r| self.get(r, a) * self.get(r, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let d = self.d;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&x, &y| a[x * d + col].abs().total_cmp(&a[y * d + col].abs()))
                .unwrap();
            if a[pivot * d + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for c in 0..d {
                    a.swap(pivot * d + c, col * d + c);
                }
                det = -det;
            }
            let p = a[col * d + col];
            det *= p;
            for r in col + 1..d {
                let f = a[r * d + col] / p;
                for c in col..d {
                    a[r * d + c] -= f * a[col * d + c];
                }
            }
        }
        det
    }
}

/// `Ra(R x)` on `[-5.12, 5.12]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedRastrigin {
    rotation: RotationMatrix,
    space: BoxSpace,
}

impl RotatedRastrigin {
    pub fn new(rotation: RotationMatrix) -> Result<Self> {
        let space = BoxSpace::cube(rotation.dim(), -5.12, 5.12)?;
        Ok(Self { rotation, space })
    }

    /// Rotated instance for `d >= 2`, plain Rastrigin for `d = 1`.
    pub fn with_seed(d: usize, seed: u64) -> Result<Self> {
        if d == 1 {
            Self::new(RotationMatrix::identity(1))
        } else {
            Self::new(RotationMatrix::salomon(d, seed)?)
        }
    }

    pub fn rotation(&self) -> &RotationMatrix {
        &self.rotation
    }
}

impl Problem for RotatedRastrigin {
    type Gene = f64;

    fn dim(&self) -> usize {
        self.rotation.dim()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let mut y = [0.0f64; 64];
        if x.len() <= y.len() {
            self.rotation.apply_into(x, &mut y[..x.len()]);
            rastrigin(&y[..x.len()])
        } else {
            rastrigin(&self.rotation.apply(x))
        }
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
