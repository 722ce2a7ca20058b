//! Deterministic control sequences and the energy-space partition.
//!
//! Subregions are indexed from `0` to `m - 1` throughout the crate. Subregion
//! `j` holds the energies `u_{j-1} < U <= u_j`, with the two boundary
//! subregions absorbing everything below the first threshold and above the
//! last one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Energy thresholds `u_1 < ... < u_{m-1}` splitting the sample space into
/// `m` subregions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    grid: Vec<f64>,
}

impl Partition {
    /// Partition from explicit thresholds.
    pub fn new(grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidPartition(
                "at least one threshold (two subregions) is required".into(),
            ));
        }
        if grid.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidPartition("thresholds must be finite".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(Self { grid })
    }

    /// `m` subregions delimited by `m - 1` evenly spaced thresholds running
    /// from `u_min` to `u_max` inclusive.
    pub fn uniform(u_min: f64, u_max: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidPartition(format!(
                "m = {m}, at least two subregions are required"
            )));
        }
        if m == 2 {
            if u_min != u_max {
                return Err(Error::InvalidPartition(
                    "with m = 2 the single threshold needs u_min == u_max".into(),
                ));
            }
            return Self::new(vec![u_min]);
        }
        if !(u_min < u_max) {
            return Err(Error::InvalidPartition(format!(
                "u_min ({u_min}) must be below u_max ({u_max})"
            )));
        }
        let steps = (m - 2) as f64;
        let grid = (0..m - 1)
            .map(|k| {
                if k == m - 2 {
                    u_max
                } else {
                    u_min + (u_max - u_min) * (k as f64) / steps
                }
            })
            .collect();
        Self::new(grid)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Number of subregions.
    pub fn len(&self) -> usize {
        self.grid.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Subregion holding `energy`. Ties at a threshold go to the lower
    /// subregion; NaN is treated as `+inf`.
    pub fn locate(&self, energy: f64) -> usize {
        if energy.is_nan() {
            return self.grid.len();
        }
        self.grid.partition_point(|&u| u < energy)
    }
}

/// Desired sampling frequencies `pi_j ∝ exp(-lambda * j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesiredProbability {
    pi: Vec<f64>,
    lambda: f64,
}

impl DesiredProbability {
    pub fn geometric(lambda: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidPartition(format!(
                "m = {m}, at least two subregions are required"
            )));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        let raw: Vec<f64> = (0..m).map(|j| (-lambda * j as f64).exp()).collect();
        let total: f64 = raw.iter().sum();
        let pi = raw.into_iter().map(|w| w / total).collect();
        Ok(Self { pi, lambda })
    }

    /// Arbitrary frequencies; they are renormalized to sum to one.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidPartition(
                "at least two subregions are required".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidSchedule(
                "desired probabilities must be positive and finite".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        Ok(Self {
            pi: weights.into_iter().map(|w| w / total).collect(),
            lambda: f64::NAN,
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }
}

/// Gain factor `gamma_t = (n_gamma / max(t, n_gamma))^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub n_gamma: u64,
    pub beta: f64,
}

impl GainSchedule {
    pub fn new(n_gamma: u64, beta: f64) -> Result<Self> {
        if n_gamma == 0 {
            return Err(Error::InvalidSchedule("n_gamma must be positive".into()));
        }
        if !(beta > 0.5 && beta <= 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "beta must lie in (0.5, 1], got {beta}"
            )));
        }
        Ok(Self { n_gamma, beta })
    }

    pub fn gain_at(&self, t: u64) -> f64 {
        let t = t.max(1);
        (self.n_gamma as f64 / t.max(self.n_gamma) as f64).powf(self.beta)
    }
}

/// Square-root temperature ladder
/// `tau_t = tau_h * sqrt(n_tau / max(t, n_tau)) + tau_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureLadder {
    pub tau_h: f64,
    pub n_tau: u64,
    pub tau_star: f64,
}

impl TemperatureLadder {
    pub fn new(tau_h: f64, n_tau: u64, tau_star: f64) -> Result<Self> {
        if !(tau_h > 0.0) || !tau_h.is_finite() {
            return Err(Error::InvalidSchedule(format!("tau_h must be positive, got {tau_h}")));
        }
        if n_tau == 0 {
            return Err(Error::InvalidSchedule("n_tau must be positive".into()));
        }
        if !(tau_star > 0.0) || !tau_star.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "tau_star must be positive, got {tau_star}"
            )));
        }
        Ok(Self { tau_h, n_tau, tau_star })
    }

    pub fn temperature_at(&self, t: u64) -> f64 {
        let t = t.max(1);
        self.tau_h * (self.n_tau as f64 / t.max(self.n_tau) as f64).sqrt() + self.tau_star
    }
}

/// Increasing truncation bounds `M_c = growth^c * M_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBounds {
    pub m0: f64,
    pub growth: f64,
}

impl Default for TruncationBounds {
    fn default() -> Self {
        Self { m0: 1e100, growth: 1e10 }
    }
}

impl TruncationBounds {
    pub fn new(m0: f64, growth: f64) -> Result<Self> {
        if !(m0 > 0.0) {
            return Err(Error::InvalidSchedule(format!("M0 must be positive, got {m0}")));
        }
        if !(growth > 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "truncation growth must exceed 1, got {growth}"
            )));
        }
        Ok(Self { m0, growth })
    }

    /// Bound after `count` truncations. Saturates at `+inf`.
    pub fn bound(&self, count: u32) -> f64 {
        self.m0 * self.growth.powi(count.min(i32::MAX as u32) as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gain_examples() {
        let g = GainSchedule::new(100, 0.55).unwrap();
        assert_eq!(g.gain_at(50), 1.0);
        // beta = 0.5 sits outside the validated range but the formula is total
        let g = GainSchedule { n_gamma: 100, beta: 0.5 };
        assert!((g.gain_at(400) - 0.5).abs() < 1e-15);
        let g = GainSchedule::new(100_000, 0.55).unwrap();
        // 0.1^0.55 = exp(0.55 * ln 0.1)
        let expected = (0.55 * 0.1f64.ln()).exp();
        assert!((g.gain_at(1_000_000) - expected).abs() < 1e-15);
        assert!((g.gain_at(1_000_000) - 0.2818).abs() < 1e-4);
    }

    #[test]
    fn gain_rejects_beta_out_of_range() {
        assert!(GainSchedule::new(10, 0.5).is_err());
        assert!(GainSchedule::new(10, 1.01).is_err());
        assert!(GainSchedule::new(10, 1.0).is_ok());
        assert!(GainSchedule::new(0, 0.7).is_err());
    }

    #[test]
    fn temperature_examples() {
        let l = TemperatureLadder::new(1.0, 1, 0.01).unwrap();
        assert!((l.temperature_at(1) - 1.01).abs() < 1e-15);
        assert!((l.temperature_at(4) - 0.51).abs() < 1e-15);
        let n = 1_000_000u64;
        let l = TemperatureLadder::new(5.0, 1, 1.0 - 5.0 / (n as f64).sqrt()).unwrap();
        assert!((l.temperature_at(n) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn desired_probability_examples() {
        let p = DesiredProbability::geometric(0.0, 5).unwrap();
        for &v in p.as_slice() {
            assert!((v - 0.2).abs() < 1e-15);
        }
        let p = DesiredProbability::geometric(0.1, 3).unwrap();
        let expected = [0.36717, 0.33223, 0.30060];
        for (v, e) in p.as_slice().iter().zip(expected) {
            assert!((v - e).abs() < 1e-5, "{v} vs {e}");
        }
        let z = 1.0 + (-0.1f64).exp() + (-0.2f64).exp();
        assert!((p.as_slice()[1] - (-0.1f64).exp() / z).abs() < 1e-15);
        let p = DesiredProbability::geometric(50.0, 2).unwrap();
        assert!((p.as_slice()[0] - 1.0).abs() < 1e-20);
        assert!(p.as_slice()[1] > 0.0 && p.as_slice()[1] < 1e-20);
        assert!(DesiredProbability::geometric(0.1, 1).is_err());
        assert!(DesiredProbability::geometric(-0.1, 3).is_err());
    }

    #[test]
    fn locate_examples() {
        let p = Partition::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.locate(-5.0), 0);
        assert_eq!(p.locate(1.0), 1);
        assert_eq!(p.locate(7.0), 3);
        assert_eq!(p.locate(0.0), 0);
        assert_eq!(p.locate(f64::INFINITY), 3);
        assert_eq!(p.locate(f64::NEG_INFINITY), 0);
        assert_eq!(p.locate(f64::NAN), 3);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![1.0, 1.0]).is_err());
        assert!(Partition::new(vec![2.0, 1.0]).is_err());
        assert!(Partition::uniform(0.0, 9.0, 1).is_err());
        let p = Partition::uniform(-0.01, 40.0, 400).unwrap();
        assert_eq!(p.len(), 400);
        assert_eq!(p.grid()[0], -0.01);
        assert_eq!(*p.grid().last().unwrap(), 40.0);
        let p = Partition::uniform(0.5, 0.5, 2).unwrap();
        assert_eq!(p.grid(), &[0.5]);
    }

    #[test]
    fn truncation_bounds_grow() {
        let b = TruncationBounds::default();
        assert_eq!(b.bound(0), 1e100);
        assert!(b.bound(1) > b.bound(0));
        let b = TruncationBounds::new(1.0, 10.0).unwrap();
        assert_eq!(b.bound(2) / b.bound(0), 100.0);
        assert!(TruncationBounds::new(1.0, 1.0).is_err());
    }

    #[test]
    fn temperature_decrement_is_small_relative_to_gain() {
        // tau_t - tau_{t+1} = o(gamma_t) for the default beta = 0.55 pairing.
        let ladder = TemperatureLadder::new(1.0, 1, 0.01).unwrap();
        let gain = GainSchedule::new(1, 0.55).unwrap();
        let ratio = |t: u64| {
            (ladder.temperature_at(t) - ladder.temperature_at(t + 1)) / gain.gain_at(t)
        };
        let checkpoints = [1u64, 10, 100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000];
        let ratios: Vec<f64> = checkpoints.iter().map(|&t| ratio(t)).collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
        assert!(ratios.last().unwrap() < &1e-6);
    }

    proptest! {
        #[test]
        fn schedules_are_monotone(t in 1u64..10_000_000, beta in 0.501f64..=1.0, ng in 1u64..100_000, nt in 1u64..100_000) {
            let g = GainSchedule::new(ng, beta).unwrap();
            prop_assert!(g.gain_at(t + 1) <= g.gain_at(t));
            prop_assert!(g.gain_at(t) > 0.0 && g.gain_at(t) <= 1.0);
            let l = TemperatureLadder::new(3.0, nt, 0.01).unwrap();
            prop_assert!(l.temperature_at(t + 1) <= l.temperature_at(t));
        }

        #[test]
        fn locate_is_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let p = Partition::uniform(-5.0, 5.0, 12).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(p.locate(lo) <= p.locate(hi));
            let j = p.locate(a);
            prop_assert!(j < p.len());
            if j > 0 { prop_assert!(p.grid()[j - 1] < a); }
            if j < p.len() - 1 { prop_assert!(a <= p.grid()[j]); }
        }

        #[test]
        fn desired_probability_normalized(lambda in 0.0f64..5.0, m in 2usize..200) {
            let p = DesiredProbability::geometric(lambda, m).unwrap();
            let s: f64 = p.as_slice().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            if lambda > 0.0 {
                prop_assert!(p.as_slice().windows(2).all(|w| w[1] < w[0] || w[1] == 0.0));
            }
        }
    }
}
