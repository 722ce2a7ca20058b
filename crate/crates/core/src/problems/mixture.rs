use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BoxSpace, Problem};
use crate::error::{Error, Result};

/// One isotropic mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec<f64>,
}

/// `U(x) = -log sum_i w_i N(x | mu_i, var I)` restricted to a box.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
    var: f64,
    space: BoxSpace,
    log_coef: Vec<f64>,
}

/// Twenty bivariate means of the classic multimodal benchmark, as
/// `weight,mean_x,mean_y` rows.
const TWENTY_MODES: &str = include_str!("../../data/mixture20.csv");

impl GaussianMixture {
    pub fn new(components: Vec<Component>, var: f64, space: BoxSpace) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidProblem("mixture needs at least one component".into()));
        }
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::InvalidProblem(format!("mixture variance must be positive, got {var}")));
        }
        let d = space.dim();
        for c in &components {
            if c.mean.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: c.mean.len() });
            }
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(Error::InvalidProblem("mixture weights must be positive".into()));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProblem(format!("mixture weights sum to {total}, not 1")));
        }
        let norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI * var).ln();
        let log_coef = components.iter().map(|c| c.weight.ln() + norm).collect();
        Ok(Self { components, var, space, log_coef })
    }

    /// The twenty-mode benchmark with equal weights on `[-1e10, 1e10]^2`.
    pub fn twenty_modes(var: f64) -> Result<Self> {
        Self::new(Self::twenty_mode_components(), var, BoxSpace::cube(2, -1e10, 1e10)?)
    }

    /// Means and weights of the twenty-mode benchmark.
    pub fn twenty_mode_components() -> Vec<Component> {
        Self::parse_components(TWENTY_MODES.as_bytes()).expect("bundled component table parses")
    }

    /// Read `weight,mean_1,...,mean_d` rows. A header row is optional.
    pub fn parse_components<R: std::io::Read>(reader: R) -> Result<Vec<Component>> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut out = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let values: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            match values {
                Ok(v) if v.len() >= 2 => out.push(Component { weight: v[0], mean: v[1..].to_vec() }),
                Ok(_) => {
                    return Err(Error::InvalidProblem(format!(
                        "component row {} needs a weight and a mean",
                        line + 1
                    )))
                }
                Err(_) if line == 0 => continue,
                Err(e) => {
                    return Err(Error::InvalidProblem(format!("component row {}: {e}", line + 1)))
                }
            }
        }
        Ok(out)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn var(&self) -> f64 {
        self.var
    }

    pub fn space(&self) -> &BoxSpace {
        &self.space
    }
}

impl Problem for GaussianMixture {
    type Gene = f64;

    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let inv = -0.5 / self.var;
        let logs = self.components.iter().zip(&self.log_coef).map(|(c, lc)| {
            let sq: f64 = x.iter().zip(&c.mean).map(|(a, b)| (a - b) * (a - b)).sum();
            lc + inv * sq
        });
        let max = logs.clone().fold(f64::NEG_INFINITY, f64::max);
        -(max + logs.map(|v| (v - max).exp()).sum::<f64>().ln())
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
