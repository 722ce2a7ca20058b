use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Problem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monomer {
    A,
    B,
}

/// Embedding dimension of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Two,
    Three,
}

/// Fibonacci word of length `n`: `S_0 = A`, `S_1 = B`, `S_i = S_{i-2} S_{i-1}`.
pub fn fibonacci_sequence(n: usize) -> Result<Vec<Monomer>> {
    let mut prev = vec![Monomer::A];
    let mut cur = vec![Monomer::B];
    while cur.len() < n {
        let next = [prev.as_slice(), cur.as_slice()].concat();
        prev = std::mem::replace(&mut cur, next);
    }
    if n < 3 || cur.len() != n {
        return Err(Error::InvalidProblem(format!(
            "chain length {n} is not a Fibonacci number >= 3"
        )));
    }
    Ok(cur)
}

/// Energy split into its bend, torsion and pair contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbTerms {
    pub bend: f64,
    pub torsion: f64,
    pub pair: f64,
}

impl AbTerms {
    pub fn total(&self) -> f64 {
        self.bend + self.torsion + self.pair
    }
}

/// Off-lattice AB chain with unit bonds, parametrized by bond angles.
///
/// In 2D the genes are `theta_2..theta_{N-1}` (`theta_1 = 0`). In 3D they
/// are `theta_2..theta_{N-1}` followed by `phi_3..phi_{N-1}`
/// (`theta_1 = phi_1 = phi_2 = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct AbModel {
    sequence: Vec<Monomer>,
    space: Space,
}

/// Drop the rounding residue that `sin`/`cos` leave at multiples of pi/2.
#[inline]
fn snap(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v
    }
}

fn wrap_angle(v: f64) -> f64 {
    let w = v.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn reflect_polar(v: f64) -> f64 {
    let w = wrap_angle(v);
    if w > PI {
        TAU - w
    } else {
        w
    }
}

impl AbModel {
    pub fn new(sequence: Vec<Monomer>, space: Space) -> Result<Self> {
        if sequence.len() < 3 {
            return Err(Error::InvalidProblem(format!(
                "chain needs at least 3 monomers, got {}",
                sequence.len()
            )));
        }
        Ok(Self { sequence, space })
    }

    /// Fibonacci chain of length `n`.
    pub fn fibonacci(n: usize, space: Space) -> Result<Self> {
        Self::new(fibonacci_sequence(n)?, space)
    }

    pub fn sequence(&self) -> &[Monomer] {
        &self.sequence
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    fn coupling(&self, a: Monomer, b: Monomer) -> f64 {
        match (self.space, a, b) {
            (_, Monomer::A, Monomer::A) => 1.0,
            (_, Monomer::B, Monomer::B) => 0.5,
            (Space::Two, _, _) => -0.5,
            (Space::Three, _, _) => 0.5,
        }
    }

    /// Full `(theta_1..theta_{N-1}, phi_1..phi_{N-1})` including the fixed
    /// gauge entries. In 2D every `phi` is `pi / 2`.
    pub fn full_angles(&self, genes: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut theta = vec![0.0; n - 1];
        theta[1..].copy_from_slice(&genes[..n - 2]);
        let phi = match self.space {
            Space::Two => vec![PI / 2.0; n - 1],
            Space::Three => {
                let mut phi = vec![0.0; n - 1];
                phi[2..].copy_from_slice(&genes[n - 2..]);
                phi
            }
        };
        (theta, phi)
    }

    /// Unit bond vectors from full angle arrays. 2D chains lie in the
    /// `z = 0` plane.
    pub fn bonds_from_angles(space: Space, theta: &[f64], phi: &[f64]) -> Vec<[f64; 3]> {
        theta
            .iter()
            .zip(phi)
            .map(|(&t, &p)| {
                let (st, ct) = t.sin_cos();
                let (st, ct) = (snap(st), snap(ct));
                match space {
                    Space::Two => [ct, st, 0.0],
                    Space::Three => {
                        let (sp, cp) = p.sin_cos();
                        let (sp, cp) = (snap(sp), snap(cp));
                        [ct * sp, st * sp, cp]
                    }
                }
            })
            .collect()
    }

    /// Bead positions by cumulative sum of the bonds, starting at the origin.
    pub fn positions_from_bonds(bonds: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let mut pos = Vec::with_capacity(bonds.len() + 1);
        let mut p = [0.0; 3];
        pos.push(p);
        for b in bonds {
            for k in 0..3 {
                p[k] += b[k];
            }
            pos.push(p);
        }
        pos
    }

    pub fn positions(&self, genes: &[f64]) -> Vec<[f64; 3]> {
        let (theta, phi) = self.full_angles(genes);
        Self::positions_from_bonds(&Self::bonds_from_angles(self.space, &theta, &phi))
    }

    /// Energy contributions of a chain given its bond vectors.
    pub fn terms_from_bonds(&self, bonds: &[[f64; 3]]) -> AbTerms {
        let n = self.len();
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let bend = match self.space {
            Space::Two => (0..n - 2).map(|i| 0.25 * (1.0 - dot(&bonds[i], &bonds[i + 1]))).sum(),
            Space::Three => (0..n - 2).map(|i| dot(&bonds[i], &bonds[i + 1])).sum(),
        };
        let torsion = match self.space {
            Space::Two => 0.0,
            Space::Three => (0..n.saturating_sub(3)).map(|i| -0.5 * dot(&bonds[i], &bonds[i + 2])).sum(),
        };
        let pos = Self::positions_from_bonds(bonds);
        let mut pair = 0.0;
        for i in 0..n - 2 {
            for j in i + 2..n {
                let r2: f64 = (0..3).map(|k| (pos[i][k] - pos[j][k]).powi(2)).sum();
                if r2 == 0.0 {
                    return AbTerms { bend, torsion, pair: f64::INFINITY };
                }
                let inv6 = 1.0 / (r2 * r2 * r2);
                pair += 4.0 * (inv6 * inv6 - self.coupling(self.sequence[i], self.sequence[j]) * inv6);
            }
        }
        AbTerms { bend, torsion, pair }
    }

    pub fn terms(&self, genes: &[f64]) -> AbTerms {
        let (theta, phi) = self.full_angles(genes);
        self.terms_from_bonds(&Self::bonds_from_angles(self.space, &theta, &phi))
    }

    /// Genes describing a chain with the given bead positions, after moving
    /// the chain into the gauge where the first bond is fixed.
    pub fn genes_from_positions(&self, positions: &[[f64; 3]]) -> Vec<f64> {
        let n = self.len();
        let bonds: Vec<[f64; 3]> = positions
            .windows(2)
            .map(|w| {
                let b = [w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]];
                let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
                [b[0] / norm, b[1] / norm, b[2] / norm]
            })
            .collect();
        match self.space {
            Space::Two => {
                let base = bonds[0][1].atan2(bonds[0][0]);
                bonds[1..].iter().map(|b| wrap_angle(b[1].atan2(b[0]) - base)).collect()
            }
            Space::Three => {
                let q = rotation_to_z(bonds[0]);
                let rotated: Vec<[f64; 3]> = bonds.iter().map(|b| mat_vec(&q, b)).collect();
                let theta = rotated[1..].iter().map(|b| wrap_angle(b[1].atan2(b[0])));
                let phi = rotated[2..].iter().map(|b| b[2].clamp(-1.0, 1.0).acos());
                let mut genes: Vec<f64> = theta.collect();
                genes.extend(phi);
                debug_assert_eq!(genes.len(), 2 * n - 5);
                genes
            }
        }
    }
}

fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Rotation taking unit vector `a` onto `+z` (Rodrigues' formula).
fn rotation_to_z(a: [f64; 3]) -> [[f64; 3]; 3] {
    let c = a[2];
    if c > 1.0 - 1e-15 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    if c < -1.0 + 1e-15 {
        return [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    }
    // axis k = a x z = (a_y, -a_x, 0)
    let v = [a[1], -a[0], 0.0];
    let k = 1.0 / (1.0 + c);
    let vx = [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]];
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let vx2: f64 = (0..3).map(|l| vx[i][l] * vx[l][j]).sum();
            r[i][j] = if i == j { 1.0 } else { 0.0 } + vx[i][j] + k * vx2;
        }
    }
    r
}

impl Problem for AbModel {
    type Gene = f64;

    fn dim(&self) -> usize {
        match self.space {
            Space::Two => self.len() - 2,
            Space::Three => 2 * self.len() - 5,
        }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        self.terms(x).total()
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.len();
        let mut x: Vec<f64> = (0..n - 2).map(|_| TAU * rng.random::<f64>()).collect();
        if self.space == Space::Three {
            x.extend((0..n - 3).map(|_| PI * rng.random::<f64>()));
        }
        x
    }

    fn constrain(&self, x: &mut [f64]) -> bool {
        let n = self.len();
        let (theta, phi) = x.split_at_mut(n - 2);
        for t in theta {
            *t = wrap_angle(*t);
        }
        for p in phi {
            *p = reflect_polar(*p);
        }
        true
    }
}
